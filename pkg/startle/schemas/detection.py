"""
Detection and clip schemas for ingested video data.
"""
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from startle.schemas.common import ArrayModel


class Detection(BaseModel):
    """
    One bounding box with its confidence on one frame.

    Example:
        {
            "frame_index": 3,
            "cx": 120.5,
            "cy": 88.0,
            "w": 42.0,
            "h": 18.0,
            "confidence": 0.93
        }
    """

    frame_index: int = Field(ge=0, description="Frame the box was detected on")
    cx: float = Field(ge=0, description="Box center x (pixels)")
    cy: float = Field(ge=0, description="Box center y (pixels)")
    w: float = Field(gt=0, description="Box width (pixels)")
    h: float = Field(gt=0, description="Box height (pixels)")
    confidence: float = Field(ge=0, le=1, description="Detector confidence")

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    def inside(self, frame_width: float, frame_height: float) -> bool:
        """Check the center lies within a frame of the given size."""
        return self.cx <= frame_width and self.cy <= frame_height


class Clip(ArrayModel):
    """
    A fixed-length window of detections and optional grayscale frames.

    Attributes:
        clip_id: Identifier, zero-based window index for segmented streams
        fps: Frame rate of the clip
        frames: One detection list per frame; frame indices are clip-relative
        frame_width: Frame width in pixels
        frame_height: Frame height in pixels
        pixels: Optional (L, H, W) float array with values in [0, 1]
    """

    clip_id: str
    fps: float = Field(default=10.0, gt=0)
    frames: List[List[Detection]]
    frame_width: int = Field(gt=0)
    frame_height: int = Field(gt=0)
    pixels: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _check_pixels(self) -> "Clip":
        if self.pixels is None:
            return self
        expected = (len(self.frames), self.frame_height, self.frame_width)
        if self.pixels.shape != expected:
            raise ValueError(f"pixels shape {self.pixels.shape} does not match {expected}")
        return self

    @property
    def length(self) -> int:
        """Number of frames in the clip."""
        return len(self.frames)

    def detection_count(self) -> int:
        """Total detections across all frames."""
        return sum(len(frame) for frame in self.frames)
