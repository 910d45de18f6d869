"""
Tracker service: frame-to-frame association of detections into tracks.
"""
import logging
from typing import List, NamedTuple, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from startle.core.exceptions import DataValidationError
from startle.models.track import Track
from startle.schemas.config import TrackerConfig
from startle.schemas.detection import Clip, Detection


logger = logging.getLogger(__name__)


def assignment_cost(a: Detection, b: Detection) -> float:
    """Euclidean distance between two detection centers, in pixels."""
    return float(np.hypot(a.cx - b.cx, a.cy - b.cy))


def solve_assignment(cost: np.ndarray) -> List[Tuple[int, int]]:
    """
    Minimum-cost matching of rows to columns.

    Rectangular matrices are supported; the matching has size min(n, m).

    Args:
        cost: (n, m) matrix of finite, non-negative costs

    Returns:
        List[Tuple[int, int]]: (row, col) pairs sorted by row

    Raises:
        DataValidationError: If the matrix is not 2-D or holds NaN, inf or negative entries
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise DataValidationError(f"cost matrix must be 2-D, got shape {cost.shape}")
    if cost.size == 0:
        return []
    if not np.all(np.isfinite(cost)):
        raise DataValidationError("cost matrix contains NaN or infinite entries")
    if np.any(cost < 0):
        raise DataValidationError("cost matrix contains negative entries")

    rows, cols = linear_sum_assignment(cost)
    optimum = float(cost[rows, cols].sum())
    return _lexicographic_optimum(cost, optimum)


def _reduced_minimum(cost: np.ndarray, rows: List[int], cols: List[int]) -> float:
    if not rows or not cols:
        return 0.0
    sub = cost[np.ix_(rows, cols)]
    r, c = linear_sum_assignment(sub)
    return float(sub[r, c].sum())


def _lexicographic_optimum(cost: np.ndarray, optimum: float) -> List[Tuple[int, int]]:
    """
    Among all minimum-cost matchings, the one whose row-sorted pairs are smallest.

    Rows are fixed in order to the lowest column that still admits an
    optimal completion of the remaining rows and columns.
    """
    n, m = cost.shape
    tolerance = 1e-9 * max(1.0, abs(optimum))
    free_cols = list(range(m))
    pairs: List[Tuple[int, int]] = []
    spent = 0.0
    for r in range(n):
        later = list(range(r + 1, n))
        for c in free_cols:
            rest = [col for col in free_cols if col != c]
            # the completion must still fill min(n, m) pairs
            if len(pairs) + 1 + min(len(later), len(rest)) != min(n, m):
                continue
            total = spent + cost[r, c] + _reduced_minimum(cost, later, rest)
            if total <= optimum + tolerance:
                pairs.append((r, c))
                spent += float(cost[r, c])
                free_cols = rest
                break
        if not free_cols:
            break
    return pairs


class StepResult(NamedTuple):
    """Outcome of one tracker step."""

    tracks: List[Track]
    new_tracks: List[Track]
    next_track_id: int


def step(
    tracks: List[Track],
    detections: List[Detection],
    frame_index: int,
    frame_width: float,
    frame_height: float,
    cfg: TrackerConfig,
    next_track_id: int = 0,
) -> StepResult:
    """
    Advance the tracker by one frame.

    Stale tracks (more than ``max_missed_frames`` since their last update)
    are terminated first; live tracks are then matched to the frame's
    detections on center distance, matches beyond the gate are dropped,
    and unmatched detections start new tracks.

    Args:
        tracks: Tracks known so far (dead tracks are passed through untouched)
        detections: Detections on this frame
        frame_index: Current frame
        frame_width: Frame width in pixels
        frame_height: Frame height in pixels
        cfg: Gating and lifecycle rules
        next_track_id: Id for the next spawned track

    Returns:
        StepResult: All tracks (existing + new), the new ones, and the next free id

    Raises:
        DataValidationError: If ``frame_index`` does not advance past a live track
    """
    live = [track for track in tracks if track.alive]
    for track in live:
        if frame_index <= track.last_update_frame:
            raise DataValidationError(
                f"frame {frame_index} does not advance track {track.track_id} "
                f"(last update {track.last_update_frame})"
            )

    for track in live:
        if frame_index - track.last_update_frame > cfg.max_missed_frames:
            track.alive = False
            logger.debug("Track %d terminated at frame %d", track.track_id, frame_index)
    live = [track for track in live if track.alive]

    gate = cfg.gate_pixels(frame_width, frame_height)
    matched_detections = set()
    if live and detections:
        cost = np.array(
            [[assignment_cost(track.last_detection, d) for d in detections] for track in live]
        )
        for row, col in solve_assignment(cost):
            if cost[row, col] > gate:
                continue
            live[row].extend(frame_index, detections[col])
            matched_detections.add(col)

    new_tracks = []
    for col, detection in enumerate(detections):
        if col in matched_detections:
            continue
        new_tracks.append(Track(next_track_id, frame_index, detection))
        next_track_id += 1

    return StepResult(list(tracks) + new_tracks, new_tracks, next_track_id)


def finalize(tracks: List[Track], fps: float, cfg: TrackerConfig) -> List[Track]:
    """
    Keep tracks lasting at least ``min_track_seconds``.

    Args:
        tracks: All tracks of a clip, alive or dead
        fps: Frame rate
        cfg: Lifecycle rules

    Returns:
        List[Track]: Surviving tracks sorted by track_id
    """
    kept = [
        track for track in tracks
        if track.span_frames + 1e-9 >= cfg.min_track_seconds * fps
    ]
    return sorted(kept, key=lambda track: track.track_id)


class TrackerService:
    """Runs the tracker over whole clips."""

    def __init__(self, cfg: TrackerConfig):
        """
        Args:
            cfg: Tracker configuration
        """
        self.cfg = cfg

    def track_clip(self, clip: Clip) -> List[Track]:
        """
        Track every frame of a clip and discard short tracks.

        Track ids restart at 0 for each clip.

        Args:
            clip: Clip to track

        Returns:
            List[Track]: Finalized tracks sorted by id
        """
        tracks: List[Track] = []
        next_id = 0
        for frame_index, detections in enumerate(clip.frames):
            tracks, _, next_id = step(
                tracks, detections, frame_index,
                clip.frame_width, clip.frame_height, self.cfg, next_id,
            )
        kept = finalize(tracks, clip.fps, self.cfg)
        logger.debug("Clip %s: %d tracks, %d kept", clip.clip_id, len(tracks), len(kept))
        return kept
