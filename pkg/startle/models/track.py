"""
Track entity built up by the tracker.
"""
from typing import List, Tuple

import numpy as np

from startle.schemas.detection import Detection


class Track:
    """
    Ordered detections attributed to one fish.

    Attributes:
        track_id: Identifier, unique within a clip
        entries: (frame_index, Detection) pairs, strictly ascending by frame
        last_update_frame: Frame of the most recent entry
        alive: False once the track has been terminated
    """

    def __init__(self, track_id: int, frame_index: int, detection: Detection):
        """
        Start a track from its first detection.

        Args:
            track_id: Identifier for the new track
            frame_index: Frame of the first detection
            detection: First detection
        """
        self.track_id = track_id
        self.entries: List[Tuple[int, Detection]] = [(frame_index, detection)]
        self.last_update_frame = frame_index
        self.alive = True

    def __repr__(self) -> str:
        return (
            f"<Track(id={self.track_id}, frames={self.first_frame}..{self.last_update_frame}, "
            f"entries={len(self.entries)}, alive={self.alive})>"
        )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def first_frame(self) -> int:
        return self.entries[0][0]

    @property
    def last_detection(self) -> Detection:
        return self.entries[-1][1]

    @property
    def frame_indices(self) -> List[int]:
        return [frame for frame, _ in self.entries]

    @property
    def span_frames(self) -> int:
        """Frames from first to last entry, inclusive."""
        return self.last_update_frame - self.first_frame + 1

    def centers(self) -> np.ndarray:
        """(n, 2) array of entry centers."""
        return np.array([[d.cx, d.cy] for _, d in self.entries], dtype=np.float64)

    def extend(self, frame_index: int, detection: Detection) -> None:
        """
        Append a detection on a later frame.

        Raises:
            ValueError: If the track is dead or the frame is not after the last entry
        """
        if not self.alive:
            raise ValueError(f"track {self.track_id} is terminated")
        if frame_index <= self.last_update_frame:
            raise ValueError(
                f"track {self.track_id}: frame {frame_index} not after {self.last_update_frame}"
            )
        self.entries.append((frame_index, detection))
        self.last_update_frame = frame_index

    @classmethod
    def from_entries(cls, track_id: int, entries: List[Tuple[int, Detection]]) -> "Track":
        """
        Rebuild a finished track from stored entries.

        Raises:
            ValueError: If entries are empty or not strictly ascending
        """
        if not entries:
            raise ValueError(f"track {track_id} has no entries")
        ordered = sorted(entries, key=lambda entry: entry[0])
        track = cls(track_id, ordered[0][0], ordered[0][1])
        for frame, detection in ordered[1:]:
            track.extend(frame, detection)
        track.alive = False
        return track
