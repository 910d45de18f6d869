"""
Dataset repository: clip directories, ground truth and label files.

Layout::

    <root>/dataset.env                 FPS, CLIP_LEN, FRAME_WIDTH, FRAME_HEIGHT
    <root>/labels.csv                  clip_id,track_id,label (track_id -1 = clip label)
    <root>/clip_<id>/detections.csv    detection records
    <root>/clip_<id>/frames/           optional frame_%06d.pgm files
    <root>/clip_<id>/truth.csv         optional ground-truth track dump
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values
from pydantic import BaseModel, Field, ValidationError

from startle.core.exceptions import DataValidationError, RecordParseError
from startle.core.file_handler import atomic_write_text, ensure_dir, read_csv_rows, require_file, write_csv
from startle.models.track import Track
from startle.repositories.detection_repository import DetectionRepository
from startle.repositories.track_repository import TrackRepository
from startle.schemas.detection import Clip


CLIP_LABEL_TRACK_ID = -1
LABEL_HEADER = ("clip_id", "track_id", "label")


class DatasetInfo(BaseModel):
    """Geometry and timing shared by every clip of a dataset."""

    fps: float = Field(gt=0)
    clip_len: int = Field(ge=1)
    frame_width: int = Field(gt=0)
    frame_height: int = Field(gt=0)


@dataclass
class DatasetLabels:
    """Ground-truth labels of a dataset."""

    clips: Dict[str, int] = field(default_factory=dict)
    tracks: Dict[Tuple[str, int], int] = field(default_factory=dict)


class DatasetRepository:
    """Repository for a directory of clips."""

    def __init__(self, root: Path):
        """
        Args:
            root: Dataset directory
        """
        self.root = Path(root)
        self.tracks = TrackRepository()

    def clip_dir(self, clip_id: str) -> Path:
        return self.root / f"clip_{clip_id}"

    def write_info(self, info: DatasetInfo) -> None:
        """Write ``dataset.env``."""
        lines = [f"{key.upper()}={value}" for key, value in info.model_dump().items()]
        atomic_write_text(self.root / "dataset.env", "\n".join(lines) + "\n")

    def read_info(self) -> DatasetInfo:
        """
        Read ``dataset.env``.

        Raises:
            MissingArtifactError: If the dataset has no info file
            DataValidationError: If a value is invalid
        """
        path = require_file(self.root / "dataset.env", "synth")
        values = {key.lower(): value for key, value in dotenv_values(path).items()}
        try:
            return DatasetInfo.model_validate(values)
        except ValidationError as exc:
            raise DataValidationError(f"{path}: {exc}") from exc

    def list_clip_ids(self) -> List[str]:
        """Clip ids present on disk, sorted."""
        if not self.root.is_dir():
            return []
        return sorted(
            path.name[len("clip_"):]
            for path in self.root.iterdir()
            if path.is_dir() and path.name.startswith("clip_")
        )

    def write_clip(self, clip: Clip, truth: Optional[List[Track]] = None) -> None:
        """
        Write a clip's detections, frames and optional ground-truth tracks.

        Args:
            clip: Clip to persist
            truth: Ground-truth tracks of the clip
        """
        directory = ensure_dir(self.clip_dir(clip.clip_id))
        detections = DetectionRepository(clip.frame_width, clip.frame_height)
        detections.write_detections(directory / "detections.csv", clip.frames)
        if clip.pixels is not None:
            detections.write_frames(directory / "frames", clip.pixels)
        if truth is not None:
            self.tracks.write_tracks(directory / "truth.csv", truth)

    def read_clip(self, clip_id: str, info: DatasetInfo, with_pixels: bool = True) -> Clip:
        """
        Load one clip.

        Args:
            clip_id: Clip identifier
            info: Dataset geometry
            with_pixels: Load frames when present

        Returns:
            Clip: The clip with clip-relative frame indices

        Raises:
            MissingArtifactError: If the clip has no detection file
        """
        directory = self.clip_dir(clip_id)
        detections = DetectionRepository(info.frame_width, info.frame_height)
        path = require_file(directory / "detections.csv", "synth")
        frames = detections.load_detections(path, n_frames=info.clip_len)
        if len(frames) != info.clip_len:
            raise DataValidationError(
                f"{path}: {len(frames)} frames exceed clip length {info.clip_len}"
            )
        pixels = None
        if with_pixels:
            pixels = detections.load_frames(directory / "frames", n_frames=info.clip_len)
        return Clip(
            clip_id=clip_id,
            fps=info.fps,
            frames=frames,
            frame_width=info.frame_width,
            frame_height=info.frame_height,
            pixels=pixels,
        )

    def has_truth(self, clip_id: str) -> bool:
        return (self.clip_dir(clip_id) / "truth.csv").exists()

    def read_truth(self, clip_id: str) -> List[Track]:
        """Ground-truth tracks of a clip."""
        return self.tracks.read_tracks(self.clip_dir(clip_id) / "truth.csv")

    def write_labels(self, labels: DatasetLabels) -> None:
        """
        Write ``labels.csv``: a clip row (track_id -1) followed by its track rows.
        """
        rows = []
        for clip_id in sorted(labels.clips):
            rows.append((clip_id, CLIP_LABEL_TRACK_ID, labels.clips[clip_id]))
            rows.extend(
                (clip_id, track_id, label)
                for (owner, track_id), label in sorted(labels.tracks.items())
                if owner == clip_id
            )
        write_csv(self.root / "labels.csv", rows, LABEL_HEADER)

    def read_labels(self) -> DatasetLabels:
        """
        Read ``labels.csv``.

        Raises:
            MissingArtifactError: If the dataset has no label file
        """
        path = self.root / "labels.csv"
        labels = DatasetLabels()
        for line_number, row in enumerate(read_csv_rows(path, "synth"), start=2):
            try:
                clip_id, track_id, label = row[0], int(row[1]), int(row[2])
            except (ValueError, IndexError) as exc:
                raise RecordParseError(line_number, "malformed label record", str(path)) from exc
            if label not in (0, 1):
                raise RecordParseError(line_number, f"label {label} is not 0/1", str(path))
            if track_id == CLIP_LABEL_TRACK_ID:
                labels.clips[clip_id] = label
            else:
                labels.tracks[(clip_id, track_id)] = label
        return labels
