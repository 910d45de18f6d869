"""
Evaluation service: AP, BCE and recall, track-wise and clip-wise.
"""
import logging
from typing import Dict, List, Sequence

import numpy as np

from startle.core.exceptions import DataValidationError
from startle.schemas.config import EvaluationConfig
from startle.schemas.evaluation import (
    ClipLabel,
    EvalReport,
    PrecisionRecallPoint,
    ScoredItem,
    TrackScore,
)
from startle.services.classifier_service import loss_bce


logger = logging.getLogger(__name__)

AP_VARIANTS = ("step", "interpolated")


def _ranked(items: Sequence[ScoredItem]) -> List[ScoredItem]:
    """Sort by descending score, ties by ascending item_id."""
    return sorted(items, key=lambda item: (-item.score, item.item_id))


def _require_positives(items: Sequence[ScoredItem]) -> int:
    positives = sum(item.label for item in items)
    if positives == 0:
        raise DataValidationError("no positive labels: metric is undefined")
    return positives


def average_precision(items: Sequence[ScoredItem], variant: str = "step") -> float:
    """
    Average precision over a ranked list.

    ``step`` sums precision at the rank of every positive, divided by the
    number of positives. ``interpolated`` first replaces each of those
    precisions by the best precision reached at any deeper rank.

    Args:
        items: Scored items with ground truth
        variant: ``step`` or ``interpolated``

    Returns:
        float: AP in [0, 1]

    Raises:
        DataValidationError: If there are no positives or the variant is unknown
    """
    if variant not in AP_VARIANTS:
        raise DataValidationError(f"unknown AP variant {variant!r}")
    positives = _require_positives(items)

    labels = np.array([item.label for item in _ranked(items)], dtype=np.float64)
    hits = np.cumsum(labels)
    precision = hits / np.arange(1, len(labels) + 1)
    if variant == "interpolated":
        precision = np.maximum.accumulate(precision[::-1])[::-1]
    return float(precision[labels == 1].sum() / positives)


def recall_at(items: Sequence[ScoredItem], threshold: float) -> float:
    """
    Fraction of positives scored at or above ``threshold``.

    Raises:
        DataValidationError: If there are no positives
    """
    positives = _require_positives(items)
    found = sum(1 for item in items if item.label == 1 and item.score >= threshold)
    return found / positives


def mean_bce(items: Sequence[ScoredItem]) -> float:
    """Mean binary cross entropy of the items; 0 for an empty list."""
    if not items:
        return 0.0
    return float(np.mean([loss_bce(item.score, item.label) for item in items]))


def max_track_scores(tracks: Sequence[TrackScore], clip_ids: Sequence[str]) -> Dict[str, float]:
    """
    Highest track score of every clip; 0 for clips without tracks.

    Raises:
        DataValidationError: If a track references a clip not in ``clip_ids``
    """
    best: Dict[str, float] = {clip_id: 0.0 for clip_id in clip_ids}
    for track in tracks:
        if track.clip_id not in best:
            raise DataValidationError(f"track {track.item_id} references unknown clip {track.clip_id}")
        best[track.clip_id] = max(best[track.clip_id], track.score)
    return best


def clip_scores(tracks: Sequence[TrackScore], clip_labels: Sequence[ClipLabel]) -> List[ScoredItem]:
    """
    Score each clip by its highest-confidence track.

    Args:
        tracks: Scored tracks tagged with their clip
        clip_labels: Ground truth of every clip under evaluation

    Returns:
        List[ScoredItem]: One item per clip, sorted by clip id; trackless clips score 0

    Raises:
        DataValidationError: If a track references a clip not in ``clip_labels``
    """
    best = max_track_scores(tracks, [clip.clip_id for clip in clip_labels])
    return [
        ScoredItem(item_id=clip.clip_id, score=best[clip.clip_id], label=clip.label)
        for clip in sorted(clip_labels, key=lambda c: c.clip_id)
    ]


def precision_recall_curve(items: Sequence[ScoredItem]) -> List[PrecisionRecallPoint]:
    """
    Precision and recall at every distinct score used as a threshold.

    Returns:
        List[PrecisionRecallPoint]: Points ordered by descending threshold

    Raises:
        DataValidationError: If there are no positives
    """
    positives = _require_positives(items)
    ranked = _ranked(items)
    points = []
    tp = 0
    for rank, item in enumerate(ranked, start=1):
        tp += item.label
        # emit once per distinct score, after its last occurrence
        if rank < len(ranked) and ranked[rank].score == item.score:
            continue
        points.append(
            PrecisionRecallPoint(threshold=item.score, precision=tp / rank, recall=tp / positives)
        )
    return points


def evaluate(
    tracks: Sequence[TrackScore],
    clip_labels: Sequence[ClipLabel],
    cfg: EvaluationConfig = EvaluationConfig(),
) -> EvalReport:
    """
    Compute the full set of track-wise and clip-wise metrics.

    Args:
        tracks: Scored tracks, each carrying its ground-truth label
        clip_labels: Ground truth of every evaluated clip
        cfg: Threshold and AP variant

    Returns:
        EvalReport: Metrics, counts and the scored items

    Raises:
        DataValidationError: If a track lacks a label or either level has no positives
    """
    track_items = []
    for track in tracks:
        if track.label is None:
            raise DataValidationError(f"track {track.item_id} has no ground-truth label")
        track_items.append(ScoredItem(item_id=track.item_id, score=track.score, label=track.label))
    track_items = _ranked(track_items)
    clip_items = clip_scores(tracks, clip_labels)

    tracked_clips = {track.clip_id for track in tracks}
    report = EvalReport(
        track_ap=average_precision(track_items, cfg.ap_variant),
        track_bce=mean_bce(track_items),
        track_recall=recall_at(track_items, cfg.threshold),
        clip_ap=average_precision(clip_items, cfg.ap_variant),
        clip_bce=mean_bce(clip_items),
        clip_recall=recall_at(clip_items, cfg.threshold),
        threshold=cfg.threshold,
        ap_variant=cfg.ap_variant,
        counts={
            "tracks": len(track_items),
            "track_positives": sum(item.label for item in track_items),
            "clips": len(clip_items),
            "clip_positives": sum(item.label for item in clip_items),
            "clips_without_tracks": sum(1 for c in clip_items if c.item_id not in tracked_clips),
        },
        track_items=track_items,
        clip_items=clip_items,
    )
    logger.info(
        "track_ap=%.4f clip_ap=%.4f over %d tracks / %d clips",
        report.track_ap, report.clip_ap, len(track_items), len(clip_items),
    )
    return report
