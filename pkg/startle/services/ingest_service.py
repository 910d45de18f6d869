"""
Ingest service: clip segmentation and GMM motion gating.
"""
import logging
from typing import List, Optional

import numpy as np

from startle.core.exceptions import DataValidationError, MissingPixelsError
from startle.schemas.config import MotionGateConfig
from startle.schemas.detection import Clip, Detection


logger = logging.getLogger(__name__)


def segment_clips(
    frames: List[List[Detection]],
    pixels: Optional[np.ndarray],
    fps: float,
    clip_len: int,
    frame_width: int,
    frame_height: int,
) -> List[Clip]:
    """
    Cut a detection stream into consecutive non-overlapping clips.

    A trailing remainder shorter than ``clip_len`` is dropped. Detection
    frame indices are re-based to the clip.

    Args:
        frames: One detection list per stream frame
        pixels: Optional (N, H, W) frames aligned with ``frames``
        fps: Stream frame rate
        clip_len: Frames per clip
        frame_width: Frame width in pixels
        frame_height: Frame height in pixels

    Returns:
        List[Clip]: Clips with ids ``000000``, ``000001``, ...

    Raises:
        DataValidationError: If ``clip_len`` < 1 or pixels do not align with frames
    """
    if clip_len < 1:
        raise DataValidationError(f"clip_len must be >= 1, got {clip_len}")

    total = len(frames)
    if pixels is not None:
        if len(pixels) < total:
            raise DataValidationError(f"{len(pixels)} pixel frames for {total} detection frames")
        total = len(pixels)
        frames = list(frames) + [[] for _ in range(total - len(frames))]

    clips = []
    for index in range(total // clip_len):
        start = index * clip_len
        window = [
            [d.model_copy(update={"frame_index": offset}) for d in frames[start + offset]]
            for offset in range(clip_len)
        ]
        clips.append(
            Clip(
                clip_id=f"{index:06d}",
                fps=fps,
                frames=window,
                frame_width=frame_width,
                frame_height=frame_height,
                pixels=None if pixels is None else pixels[start:start + clip_len],
            )
        )
    logger.info("Segmented %d frames into %d clips of %d frames", total, len(clips), clip_len)
    return clips


class GaussianMixtureBackground:
    """
    Adaptive per-pixel mixture of Gaussians background model.

    Each pixel keeps ``num_gaussians`` components (weight, mean, variance)
    updated online. Components ranked by decreasing weight form the
    background set until their cumulative weight reaches the threshold.
    """

    def __init__(self, first_frame: np.ndarray, cfg: MotionGateConfig):
        """
        Initialize the mixture from the first frame.

        Args:
            first_frame: (H, W) grayscale frame in [0, 1]
            cfg: Mixture parameters
        """
        self.cfg = cfg
        k = cfg.num_gaussians
        shape = (k,) + first_frame.shape
        self.weights = np.zeros(shape)
        self.weights[0] = 1.0
        self.means = np.zeros(shape)
        self.means[0] = first_frame
        self.variances = np.full(shape, cfg.initial_variance)

    def apply(self, frame: np.ndarray) -> np.ndarray:
        """
        Classify a frame against the current model, then update the model.

        Args:
            frame: (H, W) grayscale frame in [0, 1]

        Returns:
            np.ndarray: Boolean foreground mask
        """
        cfg = self.cfg
        x = frame[None]
        matched = (self.weights > 0) & (
            (x - self.means) ** 2 < (cfg.match_sigmas ** 2) * self.variances
        )

        # rank components by decreasing weight
        order = np.argsort(-self.weights, axis=0, kind="stable")
        ranked_weights = np.take_along_axis(self.weights, order, axis=0)
        ranked_matched = np.take_along_axis(matched, order, axis=0)
        preceding = np.cumsum(ranked_weights, axis=0) - ranked_weights
        background = preceding < cfg.background_weight_threshold
        foreground = ~np.any(background & ranked_matched, axis=0)

        # the highest-ranked matching component absorbs the observation
        has_match = ranked_matched.any(axis=0)
        best = np.take_along_axis(order, ranked_matched.argmax(axis=0)[None], axis=0)[0]
        owner = np.zeros_like(matched)
        np.put_along_axis(owner, best[None], has_match[None], axis=0)

        alpha = cfg.learning_rate
        self.weights = (1.0 - alpha) * self.weights + alpha * owner
        new_means = np.where(owner, (1.0 - alpha) * self.means + alpha * x, self.means)
        new_vars = np.where(
            owner, (1.0 - alpha) * self.variances + alpha * (x - new_means) ** 2, self.variances
        )
        self.means = new_means
        self.variances = np.maximum(new_vars, cfg.min_variance)

        # unmatched pixels replace their weakest component
        unmatched = ~has_match
        if unmatched.any():
            weakest = self.weights.argmin(axis=0)
            replace = np.zeros_like(matched)
            np.put_along_axis(replace, weakest[None], unmatched[None], axis=0)
            self.means = np.where(replace, x, self.means)
            self.variances = np.where(replace, cfg.initial_variance, self.variances)
            self.weights = np.where(replace, cfg.initial_weight, self.weights)

        self.weights /= self.weights.sum(axis=0, keepdims=True)
        return foreground


def motion_gate(clip: Clip, cfg: MotionGateConfig) -> bool:
    """
    Decide whether a clip contains motion.

    The mixture is initialized on the first frame and run over the
    remaining frames in order; a frame counts as moving when its
    foreground-pixel fraction exceeds ``cfg.foreground_fraction``.

    Args:
        clip: Clip with pixel frames
        cfg: Gate parameters

    Returns:
        bool: True to keep the clip, False to discard it

    Raises:
        MissingPixelsError: If the clip carries no frames
    """
    if clip.pixels is None:
        raise MissingPixelsError(clip.clip_id)

    model = GaussianMixtureBackground(clip.pixels[0], cfg)
    motion_frames = 0
    for frame in clip.pixels[1:]:
        fraction = float(model.apply(frame).mean())
        if fraction > cfg.foreground_fraction:
            motion_frames += 1
    keep = motion_frames >= cfg.min_motion_frames
    logger.debug("Clip %s: %d motion frames -> %s", clip.clip_id, motion_frames,
                 "keep" if keep else "discard")
    return keep
