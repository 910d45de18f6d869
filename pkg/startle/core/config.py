"""
Pipeline configuration management using Pydantic Settings.

Values resolve in the order: explicit keyword (command-line flag) >
``STARTLE_*`` environment variable > key-value config file > default.
"""
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from startle.core.exceptions import ConfigError
from startle.schemas.config import (
    DEFAULT_CLIP_LEN,
    DEFAULT_FPS,
    ClassifierConfig,
    EvaluationConfig,
    MotionGateConfig,
    TrackerConfig,
)


ENV_PREFIX = "STARTLE_"
NESTED_DELIMITER = "__"


class Settings(BaseSettings):
    """Pipeline settings loaded from flags, environment and config file."""

    # Stream
    fps: float = Field(default=DEFAULT_FPS, gt=0)
    clip_len: int = Field(default=DEFAULT_CLIP_LEN, ge=1)

    # Execution
    jobs: int = Field(default=1, ge=1)
    seed: int = 0
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = "INFO"

    # Paths
    dataset_dir: Path = Path("data")
    workdir: Path = Path("work")

    # Modules
    gate: MotionGateConfig = Field(default_factory=MotionGateConfig)
    tracker: TrackerConfig = Field(default_factory=TrackerConfig)
    kernel: Literal["binomial", "box"] = "binomial"
    classifier: ClassifierConfig = Field(default_factory=ClassifierConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)

    model_config = SettingsConfigDict(
        env_prefix=ENV_PREFIX,
        env_nested_delimiter=NESTED_DELIMITER,
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level", mode="before")
    @classmethod
    def normalize_log_level(cls, v: Any) -> Any:
        return v.upper() if isinstance(v, str) else v

    def to_env_lines(self) -> List[str]:
        """
        Render the resolved settings in config-file syntax.

        Returns:
            List[str]: ``STARTLE_KEY=value`` lines, nested keys flattened with ``__``
        """
        return [f"{key}={value}" for key, value in _flatten(self.model_dump(mode="json"), ENV_PREFIX)]


def _flatten(data: Dict[str, Any], prefix: str) -> List[tuple]:
    items: List[tuple] = []
    for key, value in data.items():
        name = f"{prefix}{key.upper()}"
        if isinstance(value, dict):
            items.extend(_flatten(value, name + NESTED_DELIMITER))
        elif isinstance(value, bool):
            items.append((name, "true" if value else "false"))
        else:
            items.append((name, value))
    return items


def load_settings(config_file: Optional[Path] = None, **overrides: Any) -> Settings:
    """
    Build settings from an optional config file plus explicit overrides.

    Args:
        config_file: Key-value (dotenv syntax) configuration file
        **overrides: Values given on the command line; ``None`` entries are ignored

    Returns:
        Settings: Resolved settings

    Raises:
        ConfigError: If the file is missing or a value is invalid
    """
    if config_file is not None and not Path(config_file).is_file():
        raise ConfigError(f"config file not found: {config_file}")

    explicit = {key: value for key, value in overrides.items() if value is not None}
    try:
        return Settings(_env_file=config_file, _env_file_encoding="utf-8", **explicit)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def merge_section(section: BaseModel, **overrides: Any) -> BaseModel:
    """
    Return a copy of a config section with non-``None`` overrides applied.

    Args:
        section: Config model to update
        **overrides: Field values from command-line flags

    Returns:
        BaseModel: Validated copy

    Raises:
        ConfigError: If an override violates a field constraint
    """
    data = section.model_dump()
    data.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return type(section).model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
