"""
Feature service: kinematic, shape and LMCM features of tracks.
"""
import logging
import math
from typing import List, Optional

import numpy as np
from scipy.signal import correlate

from startle.core.exceptions import DataValidationError
from startle.models.track import Track
from startle.schemas.detection import Clip
from startle.schemas.features import FeatureSeries, LmcmKernel, TrackSummary


logger = logging.getLogger(__name__)

TEMPORAL_WEIGHTS = np.array([-1.0, 2.0, -1.0])
SPATIAL_PROFILES = {
    "binomial": np.outer([1.0, 2.0, 1.0], [1.0, 2.0, 1.0]) / 16.0,
    "box": np.full((3, 3), 1.0 / 9.0),
}


def build_lmcm_kernel(profile: str = "binomial") -> LmcmKernel:
    """
    Build the 3x3x3 LMCM kernel.

    Each temporal slice is an isotropic spatial profile scaled by the
    second-difference weights (-1, +2, -1), so the kernel sums to zero and
    vanishes on static or constant-rate change.

    Args:
        profile: Spatial profile, ``binomial`` ([1,2,1] x [1,2,1] / 16) or ``box``

    Returns:
        LmcmKernel: The kernel
    """
    try:
        spatial = SPATIAL_PROFILES[profile]
    except KeyError:
        raise DataValidationError(f"unknown kernel profile {profile!r}") from None
    return LmcmKernel(coefficients=TEMPORAL_WEIGHTS[:, None, None] * spatial[None, :, :])


def lmcm_response(frames: np.ndarray, kernel: LmcmKernel) -> np.ndarray:
    """
    Correlate the kernel with three consecutive frames.

    Args:
        frames: (3, H, W) frames, previous / current / next
        kernel: LMCM kernel

    Returns:
        np.ndarray: (H, W) response for the middle frame; the 1-pixel border is zero

    Raises:
        DataValidationError: If the three frames differ in shape
    """
    frames = [np.asarray(frame, dtype=np.float64) for frame in frames]
    if len(frames) != 3 or len({frame.shape for frame in frames}) != 1 or frames[0].ndim != 2:
        raise DataValidationError("lmcm_response needs three 2-D frames of identical shape")
    height, width = frames[0].shape
    out = np.zeros((height, width))
    if height < 3 or width < 3:
        return out
    valid = correlate(np.stack(frames), kernel.coefficients, mode="valid", method="direct")
    out[1:-1, 1:-1] = valid[0]
    return out


def lmcm_volume(pixels: np.ndarray, kernel: LmcmKernel) -> np.ndarray:
    """
    Absolute LMCM response for every frame of a clip.

    The first and last frames lack a temporal neighbor and are all zero.

    Args:
        pixels: (L, H, W) frames
        kernel: LMCM kernel

    Returns:
        np.ndarray: (L, H, W) absolute responses
    """
    volume = np.zeros(pixels.shape, dtype=np.float64)
    for t in range(1, len(pixels) - 1):
        volume[t] = np.abs(lmcm_response(pixels[t - 1:t + 2], kernel))
    return volume


def _box_mean(response: np.ndarray, cx: float, cy: float, w: float, h: float) -> float:
    height, width = response.shape
    x0 = max(0, int(math.floor(cx - w / 2.0)))
    x1 = min(width, int(math.ceil(cx + w / 2.0)))
    y0 = max(0, int(math.floor(cy - h / 2.0)))
    y1 = min(height, int(math.ceil(cy + h / 2.0)))
    if x1 <= x0 or y1 <= y0:
        return 0.0
    return float(response[y0:y1, x0:x1].mean())


def _heading(dx: float, dy: float) -> float:
    angle = math.atan2(dy, dx)
    # keep the range half-open at -pi
    return math.pi if angle <= -math.pi else angle


def extract_features(
    track: Track,
    clip: Clip,
    kernel: LmcmKernel,
    responses: Optional[np.ndarray] = None,
) -> FeatureSeries:
    """
    Compute (speed, direction, aspect_ratio, lmcm) for every track entry.

    Speed and direction come from the displacement to the previous entry,
    divided by the actual frame gap; the first entry gets zeros. LMCM is the
    mean absolute kernel response inside the frame-clipped bounding box, or
    zero when the clip has no frames.

    Args:
        track: Track of the clip
        clip: Clip the track was built from
        kernel: LMCM kernel
        responses: Precomputed :func:`lmcm_volume` of the clip, if available

    Returns:
        FeatureSeries: One row per track entry

    Raises:
        DataValidationError: If the track has entries outside the clip
    """
    frames = track.frame_indices
    if frames[0] < 0 or frames[-1] >= clip.length:
        raise DataValidationError(
            f"track {track.track_id} spans frames {frames[0]}..{frames[-1]} "
            f"outside clip {clip.clip_id} of length {clip.length}"
        )
    if responses is None and clip.pixels is not None:
        responses = lmcm_volume(clip.pixels, kernel)

    rows = np.zeros((len(track), 4), dtype=np.float64)
    previous = None
    for i, (frame, detection) in enumerate(track.entries):
        if previous is not None:
            prev_frame, prev_detection = previous
            dx = detection.cx - prev_detection.cx
            dy = detection.cy - prev_detection.cy
            gap = frame - prev_frame
            rows[i, 0] = clip.fps * math.hypot(dx, dy) / gap
            rows[i, 1] = _heading(dx, dy) if (dx or dy) else 0.0
        rows[i, 2] = detection.w / detection.h
        if responses is not None:
            rows[i, 3] = _box_mean(responses[frame], detection.cx, detection.cy,
                                   detection.w, detection.h)
        previous = (frame, detection)

    return FeatureSeries(
        track_id=track.track_id,
        frame_indices=np.array(frames, dtype=np.int64),
        values=rows,
    )


def describe_track(track: Track, series: FeatureSeries) -> TrackSummary:
    """
    Summarize how a track moved.

    Args:
        track: The track
        series: Its feature series

    Returns:
        TrackSummary: Mean and peak speed, net heading, path length, mean aspect ratio
    """
    centers = track.centers()
    steps = np.diff(centers, axis=0)
    net = centers[-1] - centers[0]
    peak = int(np.argmax(series.speed))
    return TrackSummary(
        track_id=track.track_id,
        mean_speed=float(series.speed[1:].mean()) if len(series) > 1 else 0.0,
        peak_speed=float(series.speed[peak]),
        peak_frame=int(series.frame_indices[peak]),
        heading=_heading(float(net[0]), float(net[1])) if np.any(net) else 0.0,
        path_length=float(np.hypot(steps[:, 0], steps[:, 1]).sum()) if len(steps) else 0.0,
        mean_aspect_ratio=float(series.aspect_ratio.mean()),
    )


class FeatureService:
    """Extracts features for all tracks of a clip."""

    def __init__(self, kernel: LmcmKernel):
        """
        Args:
            kernel: LMCM kernel shared by all clips
        """
        self.kernel = kernel

    def featurize_clip(self, clip: Clip, tracks: List[Track]) -> List[FeatureSeries]:
        """
        Compute feature series for a clip's tracks, sharing one LMCM volume.

        Args:
            clip: Clip, with or without frames
            tracks: Finalized tracks of the clip

        Returns:
            List[FeatureSeries]: One series per track, same order
        """
        responses = None
        if clip.pixels is not None and tracks:
            responses = lmcm_volume(clip.pixels, self.kernel)
        return [extract_features(track, clip, self.kernel, responses) for track in tracks]
