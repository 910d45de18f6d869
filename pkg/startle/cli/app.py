"""
Command-line application: parser assembly and error-to-exit-code mapping.
"""
import argparse
import logging
from typing import List, Optional

from pydantic import ValidationError

from startle import __version__
from startle.cli.commands import classify, config, evaluate, segment, stages, synth, train
from startle.cli.deps import global_flags, settings_from_args
from startle.core.exceptions import ArtifactIOError, ConfigError, StartleError
from startle.core.logging import configure_logging


logger = logging.getLogger("startle.cli")

COMMANDS = (synth, segment, stages, train, classify, evaluate, config)


def build_parser() -> argparse.ArgumentParser:
    """Build the top-level parser with every subcommand registered."""
    common = global_flags()
    parser = argparse.ArgumentParser(
        prog="startle",
        description="Detect fish startle behavior in short video clips.",
        parents=[common],
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers, [common])
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and return its exit code.

    Exit codes: 0 success, 2 configuration error, 3 I/O failure,
    4 missing upstream artifact, 5 invalid data.
    """
    args = build_parser().parse_args(argv)
    configure_logging("INFO")
    try:
        settings = settings_from_args(args)
        configure_logging(settings.log_level)
        return args.handler(args, settings)
    except StartleError as exc:
        logger.error(exc.detail)
        return exc.exit_code
    except ValidationError as exc:
        logger.error("invalid configuration: %s", exc)
        return ConfigError.exit_code
    except OSError as exc:
        logger.error("%s: %s", exc.filename or "I/O error", exc.strerror or exc)
        return ArtifactIOError.exit_code
