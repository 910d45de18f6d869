"""
Detection and frame repository: reads and writes the ingest file formats.
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from PIL import Image
from pydantic import ValidationError

from startle.core.exceptions import ArtifactIOError, DataValidationError, RecordParseError
from startle.core.file_handler import atomic_write_bytes, ensure_dir, render_csv
from startle.schemas.detection import Detection


logger = logging.getLogger(__name__)

DETECTION_HEADER = ("frame_index", "cx", "cy", "w", "h", "confidence")
FRAME_PATTERN = "frame_{:06d}.pgm"


class DetectionRepository:
    """Repository for detection files and PGM frame directories."""

    def __init__(self, frame_width: int, frame_height: int):
        """
        Initialize repository with the frame geometry used for validation.

        Args:
            frame_width: Frame width in pixels
            frame_height: Frame height in pixels
        """
        self.frame_width = frame_width
        self.frame_height = frame_height

    def load_detections(self, path: Path, n_frames: Optional[int] = None) -> List[List[Detection]]:
        """
        Read a line-delimited detection file grouped by frame.

        Args:
            path: File with ``frame_index,cx,cy,w,h,confidence`` records
            n_frames: Pad the result to at least this many frame slots

        Returns:
            List[List[Detection]]: One list per frame index, ascending

        Raises:
            RecordParseError: If a record is malformed (names the line)
            DataValidationError: If a value is out of range
        """
        try:
            lines = Path(path).read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise ArtifactIOError(f"cannot read {path}: {exc.strerror or exc}") from exc

        by_frame: Dict[int, List[Detection]] = {}
        seen_record = False
        for line_number, line in enumerate(lines, start=1):
            if not line.strip():
                continue
            fields = [field.strip() for field in line.split(",")]
            if not seen_record and not _is_number(fields[0]):
                # header line
                seen_record = True
                continue
            seen_record = True
            detection = self._parse_record(fields, line_number, str(path))
            by_frame.setdefault(detection.frame_index, []).append(detection)

        count = max(by_frame) + 1 if by_frame else 0
        if n_frames is not None:
            count = max(count, n_frames)
        frames = [by_frame.get(index, []) for index in range(count)]
        logger.debug("Loaded %d detections over %d frames from %s",
                     sum(len(f) for f in frames), count, path)
        return frames

    def _parse_record(self, fields: List[str], line_number: int, source: str) -> Detection:
        if len(fields) != len(DETECTION_HEADER):
            raise RecordParseError(
                line_number, f"expected {len(DETECTION_HEADER)} fields, got {len(fields)}", source
            )
        try:
            frame_index = int(fields[0])
            cx, cy, w, h, confidence = (float(field) for field in fields[1:])
        except ValueError as exc:
            raise RecordParseError(line_number, f"not a number ({exc})", source) from exc

        try:
            detection = Detection(
                frame_index=frame_index, cx=cx, cy=cy, w=w, h=h, confidence=confidence
            )
        except ValidationError as exc:
            raise DataValidationError(
                f"{source}:{line_number}: invalid detection: {_first_error(exc)}"
            ) from exc
        if not detection.inside(self.frame_width, self.frame_height):
            raise DataValidationError(
                f"{source}:{line_number}: center ({cx}, {cy}) outside "
                f"{self.frame_width}x{self.frame_height} frame"
            )
        return detection

    def write_detections(self, path: Path, frames: List[List[Detection]]) -> None:
        """
        Write detections grouped by frame, with a header line.

        Args:
            path: Destination file
            frames: One detection list per frame
        """
        rows = [
            (d.frame_index, d.cx, d.cy, d.w, d.h, d.confidence)
            for frame in frames
            for d in frame
        ]
        atomic_write_bytes(Path(path), render_csv(rows, DETECTION_HEADER).encode("utf-8"))

    def load_frames(self, directory: Path, n_frames: Optional[int] = None) -> Optional[np.ndarray]:
        """
        Read ``frame_%06d.pgm`` files into an (L, H, W) array in [0, 1].

        Args:
            directory: Frame directory; a missing directory means no frames
            n_frames: Expected frame count, if known

        Returns:
            Optional[np.ndarray]: Frames, or None when the directory is absent

        Raises:
            DataValidationError: On numbering gaps or mismatched shapes
        """
        directory = Path(directory)
        if not directory.is_dir():
            return None

        paths = sorted(directory.glob("frame_*.pgm"))
        if n_frames is not None and len(paths) != n_frames:
            raise DataValidationError(
                f"{directory}: expected {n_frames} frames, found {len(paths)}"
            )
        arrays = []
        for index, path in enumerate(paths):
            if path.name != FRAME_PATTERN.format(index):
                raise DataValidationError(f"{directory}: frame {index} missing (found {path.name})")
            array = self._read_pgm(path)
            if array.shape != (self.frame_height, self.frame_width):
                raise DataValidationError(
                    f"{path}: shape {array.shape} differs from "
                    f"{(self.frame_height, self.frame_width)}"
                )
            arrays.append(array)
        if not arrays:
            return None
        return np.stack(arrays)

    @staticmethod
    def _read_pgm(path: Path) -> np.ndarray:
        try:
            with Image.open(path) as image:
                mode = image.mode
                raw = np.asarray(image, dtype=np.float64)
        except OSError as exc:
            raise ArtifactIOError(f"cannot read frame {path}: {exc}") from exc
        if mode == "L":
            return raw / 255.0
        if mode in ("I", "I;16", "I;16B"):
            return raw / 65535.0
        raise DataValidationError(f"{path}: unsupported image mode {mode}")

    def write_frames(self, directory: Path, pixels: np.ndarray) -> None:
        """
        Write an (L, H, W) array in [0, 1] as 8-bit binary PGM files.

        Args:
            directory: Destination directory (created if needed)
            pixels: Frames to write
        """
        ensure_dir(Path(directory))
        for index, frame in enumerate(pixels):
            data = np.clip(np.rint(frame * 255.0), 0, 255).astype(np.uint8)
            path = Path(directory) / FRAME_PATTERN.format(index)
            tmp = path.with_name(path.name + ".tmp")
            try:
                Image.fromarray(data).save(tmp, format="PPM")
                tmp.replace(path)
            except OSError as exc:
                raise ArtifactIOError(f"cannot write frame {path}: {exc}") from exc


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    location = ".".join(str(part) for part in error.get("loc", ()))
    return f"{location}: {error.get('msg')}"
