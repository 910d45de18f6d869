"""
File handling utilities for stage artifacts.
"""
import csv
import io
import os
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

from startle.core.exceptions import ArtifactIOError, MissingArtifactError


def ensure_dir(path: Path) -> Path:
    """
    Create a directory (and parents) if needed.

    Args:
        path: Directory to create

    Returns:
        Path: The directory

    Raises:
        ArtifactIOError: If the directory cannot be created
    """
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"cannot create directory {path}: {exc.strerror or exc}") from exc
    return path


def require_file(path: Path, stage: Optional[str] = None) -> Path:
    """
    Check an upstream artifact exists.

    Args:
        path: Expected file
        stage: Stage that produces it, named in the error

    Raises:
        MissingArtifactError: If the file is absent
    """
    if not path.exists():
        raise MissingArtifactError(str(path), stage)
    return path


def atomic_write_bytes(path: Path, data: bytes) -> None:
    """
    Write bytes through a temp file in the target directory and rename.

    Args:
        path: Destination file
        data: Content

    Raises:
        ArtifactIOError: If writing fails
    """
    tmp = path.with_name(path.name + ".tmp")
    try:
        ensure_dir(path.parent)
        with tmp.open("wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(str(tmp), str(path))
    except OSError as exc:
        if tmp.exists():
            tmp.unlink()
        raise ArtifactIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def atomic_write_text(path: Path, text: str) -> None:
    """Write UTF-8 text atomically."""
    atomic_write_bytes(path, text.encode("utf-8"))


def format_float(value: float) -> str:
    """Render a float exactly and reproducibly."""
    return format(float(value), ".17g")


def render_csv(rows: Iterable[Sequence], header: Optional[Sequence[str]] = None) -> str:
    """
    Render rows as CSV text with ``\\n`` line endings.

    Floats are written with :func:`format_float`.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if header is not None:
        writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def write_csv(path: Path, rows: Iterable[Sequence], header: Optional[Sequence[str]] = None) -> None:
    """Write rows as CSV atomically."""
    atomic_write_text(path, render_csv(rows, header))


def read_csv_rows(path: Path, stage: Optional[str] = None) -> List[List[str]]:
    """
    Read a CSV artifact written by :func:`write_csv` with a header row.

    Args:
        path: CSV file
        stage: Stage that produces the file, for the missing-artifact message

    Returns:
        List[List[str]]: Data rows with their fields as strings
    """
    require_file(path, stage)
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            rows = [row for row in csv.reader(f) if row]
    except OSError as exc:
        raise ArtifactIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return rows[1:]
