"""
Exception hierarchy shared by services, repositories and the CLI.

Every error carries the process exit code the CLI reports for it.
"""
from typing import Optional


class StartleError(Exception):
    """Base error for the startle pipeline."""

    exit_code: int = 1

    def __init__(self, detail: str):
        """
        Args:
            detail: Human readable description of the failure
        """
        super().__init__(detail)
        self.detail = detail


class ConfigError(StartleError):
    """Invalid configuration value or file."""

    exit_code = 2


class ArtifactIOError(StartleError):
    """Reading or writing an artifact failed at the filesystem level."""

    exit_code = 3


class MissingArtifactError(StartleError):
    """An upstream stage artifact is absent."""

    exit_code = 4

    def __init__(self, path: str, stage: Optional[str] = None):
        """
        Args:
            path: Path of the absent file
            stage: Stage expected to have produced it
        """
        hint = f" (run the '{stage}' stage first)" if stage else ""
        super().__init__(f"missing artifact: {path}{hint}")
        self.path = path


class DataValidationError(StartleError):
    """Input data violates a domain invariant."""

    exit_code = 5


class RecordParseError(DataValidationError):
    """A line-delimited record could not be parsed."""

    def __init__(self, line_number: int, reason: str, source: Optional[str] = None):
        """
        Args:
            line_number: 1-based line number of the offending record
            reason: What was wrong with it
            source: File the record came from
        """
        where = f"{source}:" if source else "line "
        super().__init__(f"{where}{line_number}: {reason}")
        self.line_number = line_number


class MissingPixelsError(DataValidationError):
    """Motion gating was requested for a clip without frames."""

    def __init__(self, clip_id: str):
        super().__init__(
            f"clip {clip_id} has no pixel frames; skip motion gating for detection-only input"
        )
        self.clip_id = clip_id
