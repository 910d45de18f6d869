"""
Track repository: track dumps and per-track labels.
"""
from pathlib import Path
from typing import Dict, List, Tuple

from pydantic import ValidationError

from startle.core.exceptions import DataValidationError, RecordParseError
from startle.core.file_handler import read_csv_rows, write_csv
from startle.models.track import Track
from startle.schemas.detection import Detection


TRACK_HEADER = ("track_id", "frame_index", "cx", "cy", "w", "h", "confidence")
TRACK_LABEL_HEADER = ("clip_id", "track_id", "label")


class TrackRepository:
    """Repository for track dump files."""

    def write_tracks(self, path: Path, tracks: List[Track]) -> None:
        """
        Write one line per track entry, grouped by track.

        Args:
            path: Destination file
            tracks: Tracks to dump, written in the given order
        """
        rows = [
            (track.track_id, frame, d.cx, d.cy, d.w, d.h, d.confidence)
            for track in tracks
            for frame, d in track.entries
        ]
        write_csv(path, rows, TRACK_HEADER)

    def read_tracks(self, path: Path) -> List[Track]:
        """
        Read a track dump back into finished (not alive) tracks.

        Args:
            path: Track dump file

        Returns:
            List[Track]: Tracks ordered by track_id

        Raises:
            MissingArtifactError: If the file is absent
            RecordParseError: If a line is malformed
        """
        entries: Dict[int, List[Tuple[int, Detection]]] = {}
        for line_number, row in enumerate(read_csv_rows(path, "track"), start=2):
            if len(row) != len(TRACK_HEADER):
                raise RecordParseError(line_number, "malformed track record", str(path))
            try:
                track_id, frame = int(row[0]), int(row[1])
                detection = Detection(
                    frame_index=frame,
                    cx=float(row[2]), cy=float(row[3]),
                    w=float(row[4]), h=float(row[5]),
                    confidence=float(row[6]),
                )
            except (ValueError, ValidationError) as exc:
                raise RecordParseError(line_number, str(exc), str(path)) from exc
            entries.setdefault(track_id, []).append((frame, detection))
        try:
            return [Track.from_entries(track_id, entries[track_id]) for track_id in sorted(entries)]
        except ValueError as exc:
            raise DataValidationError(f"{path}: {exc}") from exc

    def write_track_labels(self, path: Path, labels: List[Tuple[str, int, int]]) -> None:
        """Write ``clip_id,track_id,label`` rows."""
        write_csv(path, labels, TRACK_LABEL_HEADER)

    def read_track_labels(self, path: Path) -> Dict[Tuple[str, int], int]:
        """
        Read per-track labels keyed by (clip_id, track_id).

        Raises:
            MissingArtifactError: If the file is absent
        """
        labels: Dict[Tuple[str, int], int] = {}
        for line_number, row in enumerate(read_csv_rows(path, "track"), start=2):
            try:
                labels[(row[0], int(row[1]))] = int(row[2])
            except (ValueError, IndexError) as exc:
                raise RecordParseError(line_number, "malformed label record", str(path)) from exc
        return labels
