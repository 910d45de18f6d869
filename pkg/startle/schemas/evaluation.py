"""
Evaluation schemas: scored items and the evaluation report.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class ScoredItem(BaseModel):
    """
    One scored prediction with its ground truth.

    Example:
        {"item_id": "clip_000003/2", "score": 0.87, "label": 1}
    """

    item_id: str
    score: float = Field(ge=0, le=1)
    label: int = Field(ge=0, le=1)

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)


class TrackScore(BaseModel):
    """Confidence of one predicted track, tagged with its clip."""

    clip_id: str
    track_id: int
    score: float = Field(ge=0, le=1)
    label: Optional[int] = Field(default=None, ge=0, le=1)

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    @property
    def item_id(self) -> str:
        return f"{self.clip_id}/{self.track_id}"


class ClipLabel(BaseModel):
    """Ground-truth label of a clip."""

    clip_id: str
    label: int = Field(ge=0, le=1)


class PrecisionRecallPoint(BaseModel):
    """One operating point of a precision-recall curve."""

    threshold: float
    precision: float
    recall: float


class EvalReport(BaseModel):
    """
    Track-wise and clip-wise metrics of one evaluation run.

    Example:
        {
            "track_ap": 0.97,
            "track_bce": 0.12,
            "clip_ap": 0.94,
            "clip_recall": 0.9,
            "threshold": 0.5
        }
    """

    track_ap: float = Field(ge=0, le=1)
    track_bce: float = Field(ge=0)
    track_recall: float = Field(ge=0, le=1)
    clip_ap: float = Field(ge=0, le=1)
    clip_bce: float = Field(ge=0)
    clip_recall: float = Field(ge=0, le=1)
    threshold: float
    ap_variant: str = "step"
    counts: Dict[str, int] = Field(default_factory=dict)
    track_items: List[ScoredItem] = Field(default_factory=list)
    clip_items: List[ScoredItem] = Field(default_factory=list)
