"""
Shared command-line plumbing: global flags and settings resolution.
"""
import argparse
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ValidationError

from startle.core.config import Settings, load_settings, merge_section
from startle.core.exceptions import ConfigError


def global_flags() -> argparse.ArgumentParser:
    """
    Parent parser with the flags every subcommand accepts.

    Defaults are suppressed so a flag given before the subcommand is not
    overwritten by the subcommand's own copy.
    """
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, default=argparse.SUPPRESS,
                        help="Key-value configuration file (STARTLE_* keys).")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="Worker processes for per-clip stages.")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="Seed for generation, initialization and shuffling.")
    parser.add_argument("--log-level", default=argparse.SUPPRESS,
                        help="DEBUG, INFO, WARNING or ERROR.")
    parser.add_argument("--dataset", dest="dataset_dir", type=Path, default=argparse.SUPPRESS,
                        help="Dataset directory.")
    parser.add_argument("--workdir", type=Path, default=argparse.SUPPRESS,
                        help="Directory for stage artifacts.")
    return parser


def settings_from_args(args: argparse.Namespace) -> Settings:
    """Resolve settings: flags > environment > config file > defaults."""
    return load_settings(
        getattr(args, "config", None),
        jobs=getattr(args, "jobs", None),
        seed=getattr(args, "seed", None),
        log_level=getattr(args, "log_level", None),
        dataset_dir=getattr(args, "dataset_dir", None),
        workdir=getattr(args, "workdir", None),
    )


def with_section(settings: Settings, name: str, **overrides: Any) -> Settings:
    """
    Apply command-line overrides to one config section.

    Args:
        settings: Resolved settings
        name: Section attribute, e.g. ``classifier``
        **overrides: Field values; ``None`` entries are ignored

    Returns:
        Settings: Updated copy
    """
    section = merge_section(getattr(settings, name), **overrides)
    return settings.model_copy(update={name: section})


def build_model(model: type, **values: Any) -> BaseModel:
    """
    Validate a config model built from flags, dropping ``None`` values.

    Raises:
        ConfigError: If a value violates a constraint
    """
    try:
        return model.model_validate({k: v for k, v in values.items() if v is not None})
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
