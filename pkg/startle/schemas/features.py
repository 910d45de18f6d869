"""
Feature schemas: the LMCM kernel, per-track feature series and track summaries.
"""
from typing import Tuple

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from startle.schemas.common import ArrayModel
from startle.schemas.config import FEATURE_COUNT


FEATURE_NAMES: Tuple[str, ...] = ("speed", "direction", "aspect_ratio", "lmcm")


class LmcmKernel(ArrayModel):
    """3x3x3 zero-sum spatio-temporal kernel (time, y, x)."""

    coefficients: np.ndarray

    @field_validator("coefficients")
    @classmethod
    def validate_coefficients(cls, v: np.ndarray) -> np.ndarray:
        if v.shape != (3, 3, 3):
            raise ValueError(f"kernel must be 3x3x3, got {v.shape}")
        if abs(float(v.sum())) > 1e-12:
            raise ValueError("kernel coefficients must sum to zero")
        for t in range(3):
            layer = v[t]
            if not (
                np.allclose(layer, np.rot90(layer))
                and np.allclose(layer, layer[::-1, :])
                and np.allclose(layer, layer[:, ::-1])
            ):
                raise ValueError(f"temporal slice {t} is not isotropic")
        return v

    @property
    def temporal_sums(self) -> np.ndarray:
        """Sum of each temporal slice."""
        return self.coefficients.sum(axis=(1, 2))


class FeatureSeries(ArrayModel):
    """
    Per-frame behavior features of one track.

    Attributes:
        track_id: Track the rows belong to
        frame_indices: Clip-relative frame index of each row
        values: (n, 4) rows of (speed, direction, aspect_ratio, lmcm)
    """

    track_id: int
    frame_indices: np.ndarray
    values: np.ndarray

    @model_validator(mode="after")
    def _check_rows(self) -> "FeatureSeries":
        if self.values.ndim != 2 or self.values.shape[1] != FEATURE_COUNT:
            raise ValueError(f"feature rows must have {FEATURE_COUNT} columns")
        if len(self.frame_indices) != len(self.values):
            raise ValueError("frame_indices and values differ in length")
        if len(self.values):
            if np.any(self.values[:, 2] <= 0):
                raise ValueError("aspect_ratio must be positive")
            if np.any(self.values[:, 3] < 0):
                raise ValueError("lmcm must be non-negative")
        return self

    def __len__(self) -> int:
        return len(self.values)

    @property
    def speed(self) -> np.ndarray:
        return self.values[:, 0]

    @property
    def direction(self) -> np.ndarray:
        return self.values[:, 1]

    @property
    def aspect_ratio(self) -> np.ndarray:
        return self.values[:, 2]

    @property
    def lmcm(self) -> np.ndarray:
        return self.values[:, 3]


class TrackSummary(BaseModel):
    """Description of a track's movement, reported alongside its label."""

    track_id: int
    mean_speed: float
    peak_speed: float
    peak_frame: int
    heading: float
    path_length: float
    mean_aspect_ratio: float
