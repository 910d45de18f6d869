"""
Classification command.
"""
import argparse
from pathlib import Path
from typing import List

from startle.core.config import Settings
from startle.core.exceptions import ConfigError
from startle.services.pipeline_service import run_classify


def register(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "classify", parents=parents, help="Score every track and clip with a trained model."
    )
    parser.add_argument("--threshold", type=float,
                        help="Decision threshold (default: the model's own).")
    parser.add_argument("--model", type=Path, help="Model file (default: <workdir>/model.bin).")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    if args.threshold is not None and not 0 < args.threshold < 1:
        raise ConfigError(f"threshold must lie in (0, 1), got {args.threshold}")
    run_classify(settings, threshold=args.threshold, model_path=args.model)
    return 0
