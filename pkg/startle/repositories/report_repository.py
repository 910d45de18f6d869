"""
Report repository: gate decisions, scores, loss curves and evaluation reports.
"""
from pathlib import Path
from typing import Callable, Dict, List, Sequence

from pydantic import ValidationError

from startle.core.exceptions import RecordParseError
from startle.core.file_handler import atomic_write_text, format_float, read_csv_rows, write_csv
from startle.schemas.classifier import TrainingResult
from startle.schemas.common import TrackLabel
from startle.schemas.evaluation import EvalReport, PrecisionRecallPoint, TrackScore
from startle.schemas.features import TrackSummary


GATE_HEADER = ("clip_id", "keep")
TRACK_SCORE_HEADER = (
    "clip_id", "track_id", "score", "label",
    "mean_speed", "peak_speed", "peak_frame", "heading", "path_length", "mean_aspect_ratio",
)
CLIP_SCORE_HEADER = ("clip_id", "score", "label")
ITEM_HEADER = ("split", "item_id", "score", "label")
CURVE_HEADER = ("threshold", "precision", "recall")


class ReportRepository:
    """Repository for stage outputs that are tables of scores or decisions."""

    def write_gate(self, path: Path, decisions: Dict[str, bool]) -> None:
        """Write ``clip_id,keep`` rows sorted by clip id."""
        write_csv(path, [(clip_id, int(decisions[clip_id])) for clip_id in sorted(decisions)],
                  GATE_HEADER)

    def read_gate(self, path: Path) -> Dict[str, bool]:
        """Read gate decisions."""
        decisions: Dict[str, bool] = {}
        for line_number, row in enumerate(read_csv_rows(path, "gate"), start=2):
            try:
                decisions[row[0]] = bool(int(row[1]))
            except (ValueError, IndexError) as exc:
                raise RecordParseError(line_number, "malformed gate record", str(path)) from exc
        return decisions

    def write_track_scores(
        self,
        path: Path,
        scores: List[TrackScore],
        summaries: Dict[tuple, TrackSummary],
        labeler: Callable[[float], TrackLabel],
    ) -> None:
        """
        Write per-track confidences, predicted labels and movement summaries.

        Args:
            path: Destination file
            scores: Track confidences
            summaries: Track summaries keyed by (clip_id, track_id)
            labeler: Maps a confidence to the predicted label
        """
        rows = []
        for score in scores:
            summary = summaries[(score.clip_id, score.track_id)]
            rows.append((
                score.clip_id, score.track_id, float(score.score),
                labeler(score.score).value,
                float(summary.mean_speed), float(summary.peak_speed), summary.peak_frame,
                float(summary.heading), float(summary.path_length), float(summary.mean_aspect_ratio),
            ))
        write_csv(path, rows, TRACK_SCORE_HEADER)

    def read_track_scores(self, path: Path) -> List[TrackScore]:
        """Read per-track confidences (labels are not attached)."""
        scores = []
        for line_number, row in enumerate(read_csv_rows(path, "classify"), start=2):
            try:
                scores.append(TrackScore(clip_id=row[0], track_id=int(row[1]), score=float(row[2])))
            except (ValueError, IndexError, ValidationError) as exc:
                raise RecordParseError(line_number, "malformed track score", str(path)) from exc
        return scores

    def write_clip_scores(
        self, path: Path, scores: Dict[str, float], labeler: Callable[[float], TrackLabel]
    ) -> None:
        """Write per-clip scores with predicted labels, sorted by clip id."""
        rows = [
            (clip_id, float(scores[clip_id]), labeler(scores[clip_id]).value)
            for clip_id in sorted(scores)
        ]
        write_csv(path, rows, CLIP_SCORE_HEADER)

    def write_loss_curve(self, path: Path, result: TrainingResult) -> None:
        """Write ``epoch,train_bce[,val_bce]`` rows."""
        if result.val_loss:
            rows = [
                (epoch + 1, float(train), float(val))
                for epoch, (train, val) in enumerate(zip(result.train_loss, result.val_loss))
            ]
            write_csv(path, rows, ("epoch", "train_bce", "val_bce"))
        else:
            rows = [(epoch + 1, float(train)) for epoch, train in enumerate(result.train_loss)]
            write_csv(path, rows, ("epoch", "train_bce"))

    def write_report(self, path: Path, report: EvalReport) -> None:
        """Write the ``key = value`` report."""
        atomic_write_text(path, render_report(report))

    def write_items(self, path: Path, report: EvalReport) -> None:
        """Write every scored track and clip with its ground truth."""
        rows = [("track", item.item_id, float(item.score), item.label) for item in report.track_items]
        rows += [("clip", item.item_id, float(item.score), item.label) for item in report.clip_items]
        write_csv(path, rows, ITEM_HEADER)

    def write_curve(self, path: Path, points: Sequence[PrecisionRecallPoint]) -> None:
        """Write a precision-recall curve."""
        rows = [(float(p.threshold), float(p.precision), float(p.recall)) for p in points]
        write_csv(path, rows, CURVE_HEADER)


def render_report(report: EvalReport) -> str:
    """
    Render an evaluation report as ``key = value`` lines.

    Args:
        report: Metrics to render

    Returns:
        str: Report text
    """
    lines = [
        f"track_ap = {format_float(report.track_ap)}",
        f"track_bce = {format_float(report.track_bce)}",
        f"track_recall = {format_float(report.track_recall)}",
        f"clip_ap = {format_float(report.clip_ap)}",
        f"clip_bce = {format_float(report.clip_bce)}",
        f"clip_recall = {format_float(report.clip_recall)}",
        f"threshold = {format_float(report.threshold)}",
        f"ap_variant = {report.ap_variant}",
    ]
    lines += [f"{key} = {value}" for key, value in sorted(report.counts.items())]
    return "\n".join(lines) + "\n"
