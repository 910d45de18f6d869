"""
Per-module configuration schemas.

Defaults follow the published operating point wherever one exists; the
remaining values are conventional choices exposed for tuning.
"""
from typing import Literal

from pydantic import BaseModel, Field


# Published constants
DEFAULT_FPS = 10.0
DEFAULT_CLIP_LEN = 40
DEFAULT_GATE_FRACTION = 0.15
DEFAULT_MAX_MISSED_FRAMES = 5
DEFAULT_MIN_TRACK_SECONDS = 2.0
DEFAULT_DECISION_THRESHOLD = 0.5
FEATURE_COUNT = 4


class MotionGateConfig(BaseModel):
    """Adaptive per-pixel Gaussian mixture used to discard motionless clips."""

    num_gaussians: int = Field(default=3, gt=0)
    learning_rate: float = Field(default=0.01, gt=0, le=1)
    background_weight_threshold: float = Field(default=0.7, gt=0, le=1)
    match_sigmas: float = Field(default=2.5, gt=0)
    foreground_fraction: float = Field(default=0.001, gt=0, le=1)
    min_motion_frames: int = Field(default=1, gt=0)
    initial_variance: float = Field(default=0.0025, gt=0)
    min_variance: float = Field(default=1e-4, gt=0)
    initial_weight: float = Field(default=0.05, gt=0, lt=1)


class TrackerConfig(BaseModel):
    """Association gating and track lifecycle rules."""

    gate_fraction: float = Field(default=DEFAULT_GATE_FRACTION, gt=0, le=1)
    gate_reference: Literal["diagonal", "width", "height"] = "diagonal"
    max_missed_frames: int = Field(default=DEFAULT_MAX_MISSED_FRAMES, ge=1)
    min_track_seconds: float = Field(default=DEFAULT_MIN_TRACK_SECONDS, ge=0)

    def gate_pixels(self, frame_width: float, frame_height: float) -> float:
        """
        Maximum association distance for a frame size.

        Args:
            frame_width: Frame width in pixels
            frame_height: Frame height in pixels

        Returns:
            float: Gate radius in pixels
        """
        if self.gate_reference == "width":
            reference = float(frame_width)
        elif self.gate_reference == "height":
            reference = float(frame_height)
        else:
            reference = float((frame_width ** 2 + frame_height ** 2) ** 0.5)
        return self.gate_fraction * reference


class ClassifierConfig(BaseModel):
    """Network shape and training hyperparameters."""

    seq_len: int = Field(default=DEFAULT_CLIP_LEN, ge=1)
    conv1_channels: int = Field(default=16, ge=1)
    conv2_channels: int = Field(default=32, ge=1)
    hidden_size: int = Field(default=64, ge=1)
    epochs: int = Field(default=200, ge=0)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    beta1: float = Field(default=0.9, ge=0, lt=1)
    beta2: float = Field(default=0.999, ge=0, lt=1)
    adam_eps: float = Field(default=1e-8, gt=0)
    val_fraction: float = Field(default=0.0, ge=0, lt=0.5)
    decision_threshold: float = Field(default=DEFAULT_DECISION_THRESHOLD, gt=0, lt=1)


class EvaluationConfig(BaseModel):
    """Metric options."""

    threshold: float = Field(default=DEFAULT_DECISION_THRESHOLD, gt=0, lt=1)
    ap_variant: Literal["step", "interpolated"] = "step"
    pr_curve: bool = False
