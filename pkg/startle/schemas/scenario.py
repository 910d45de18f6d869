"""
Synthetic scenario configuration.
"""
import math
from typing import Tuple

from pydantic import BaseModel, Field, field_validator, model_validator

from startle.schemas.config import DEFAULT_CLIP_LEN, DEFAULT_FPS


class ScenarioConfig(BaseModel):
    """
    Knobs of the synthetic startle dataset generator.

    Example:
        {
            "seed": 7,
            "n_clips": 10,
            "fish_per_clip": [1, 3],
            "startle_probability": 0.5
        }
    """

    seed: int = 0
    n_clips: int = Field(default=10, ge=0)
    fps: float = Field(default=DEFAULT_FPS, gt=0)
    clip_len: int = Field(default=DEFAULT_CLIP_LEN, ge=1)
    frame_width: int = Field(default=640, gt=0)
    frame_height: int = Field(default=480, gt=0)
    fish_per_clip: Tuple[int, int] = (1, 3)
    cruise_speed: Tuple[float, float] = (20.0, 60.0)
    startle_probability: float = Field(default=0.5, ge=0, le=1)
    multi_startle_probability: float = Field(default=0.0, ge=0, le=1)
    startle_speed_multiplier: float = Field(default=4.0, gt=0)
    startle_turn: Tuple[float, float] = (math.pi / 2, math.pi)
    startle_aspect_drop: float = Field(default=0.5, gt=0)
    startle_seconds: float = Field(default=1.0, gt=0)
    fish_length: Tuple[float, float] = (40.0, 80.0)
    turn_sigma: float = Field(default=0.08, ge=0)
    detection_noise_sigma: float = Field(default=1.0, ge=0)
    miss_rate: float = Field(default=0.05, ge=0, lt=1)
    render_frames: bool = False
    pixel_noise_sigma: float = Field(default=0.005, ge=0)

    @field_validator("fish_per_clip")
    @classmethod
    def validate_fish_range(cls, v: Tuple[int, int]) -> Tuple[int, int]:
        if v[0] < 0 or v[1] < v[0]:
            raise ValueError("fish_per_clip must be an ascending non-negative range")
        return v

    @field_validator("cruise_speed", "startle_turn", "fish_length")
    @classmethod
    def validate_range(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if v[0] < 0 or v[1] <= v[0]:
            raise ValueError("range must be non-degenerate with a non-negative lower bound")
        return v

    @model_validator(mode="after")
    def validate_event_fits(self) -> "ScenarioConfig":
        if self.startle_frames >= self.clip_len:
            raise ValueError("startle event must leave at least one frame before its onset")
        return self

    @property
    def startle_frames(self) -> int:
        """Duration of one startle event in frames."""
        return max(1, int(round(self.startle_seconds * self.fps)))
