"""
Classifier input/output schemas.
"""
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from startle.schemas.common import ArrayModel, TrackLabel
from startle.schemas.config import FEATURE_COUNT


class NormalizationCoefficients(ArrayModel):
    """Per-feature min/max used to map values onto [-1, 1]."""

    lo: np.ndarray
    hi: np.ndarray

    @model_validator(mode="after")
    def _check_bounds(self) -> "NormalizationCoefficients":
        if self.lo.shape != (FEATURE_COUNT,) or self.hi.shape != (FEATURE_COUNT,):
            raise ValueError(f"normalization needs {FEATURE_COUNT} lo/hi values")
        if not np.all(self.lo < self.hi):
            raise ValueError("every column needs lo < hi")
        return self

    def apply(self, values: np.ndarray) -> np.ndarray:
        """
        Map raw feature rows onto [-1, 1], clipping out-of-range values.

        Args:
            values: (n, 4) raw feature rows

        Returns:
            np.ndarray: Normalized rows
        """
        scaled = 2.0 * (values - self.lo) / (self.hi - self.lo) - 1.0
        return np.clip(scaled, -1.0, 1.0)


class TrackTensor(ArrayModel):
    """Fixed (L, 4) normalized classifier input."""

    values: np.ndarray
    valid_len: int = Field(ge=0)

    @model_validator(mode="after")
    def _check_padding(self) -> "TrackTensor":
        if self.values.ndim != 2 or self.values.shape[1] != FEATURE_COUNT:
            raise ValueError(f"tensor must be (L, {FEATURE_COUNT})")
        if self.valid_len > self.values.shape[0]:
            raise ValueError("valid_len exceeds tensor length")
        if np.any(self.values[self.valid_len:] != 0.0):
            raise ValueError("padding rows must be zero")
        if np.any(np.abs(self.values) > 1.0):
            raise ValueError("tensor values must lie in [-1, 1]")
        return self


class LabeledTensor(BaseModel):
    """Training example: a tensor plus its 0/1 ground-truth label."""

    tensor: TrackTensor
    label: int = Field(ge=0, le=1)


class TrainingResult(BaseModel):
    """Per-epoch losses of a training run."""

    train_loss: List[float] = Field(default_factory=list)
    val_loss: List[float] = Field(default_factory=list)
    best_epoch: Optional[int] = None


class Classification(BaseModel):
    """Label and confidence assigned to one track."""

    label: TrackLabel
    confidence: float = Field(ge=0, le=1)
