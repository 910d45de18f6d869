"""
Builders shared by the test modules.
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np

from startle.schemas.detection import Clip, Detection


def make_detection(frame: int, cx: float, cy: float, w: float = 40.0, h: float = 16.0,
                   confidence: float = 0.9) -> Detection:
    return Detection(frame_index=frame, cx=cx, cy=cy, w=w, h=h, confidence=confidence)


def make_clip(
    paths: Sequence[Sequence[Optional[Tuple[float, float]]]],
    length: int = 40,
    fps: float = 10.0,
    width: int = 640,
    height: int = 480,
    pixels: Optional[np.ndarray] = None,
    clip_id: str = "000000",
) -> Clip:
    """Clip where fish ``i`` sits at ``paths[i][t]`` on frame t (None = missed)."""
    frames: List[List[Detection]] = [[] for _ in range(length)]
    for path in paths:
        for t, point in enumerate(path):
            if point is not None:
                frames[t].append(make_detection(t, point[0], point[1]))
    return Clip(clip_id=clip_id, fps=fps, frames=frames, frame_width=width,
                frame_height=height, pixels=pixels)


def straight_path(start: Tuple[float, float], velocity: Tuple[float, float],
                  length: int = 40) -> List[Tuple[float, float]]:
    return [(start[0] + velocity[0] * t, start[1] + velocity[1] * t) for t in range(length)]
