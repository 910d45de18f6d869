"""
Print the resolved configuration in config-file syntax.
"""
import argparse
from typing import List

from startle.core.config import Settings


def register(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "config", parents=parents,
        help="Show the effective settings as STARTLE_* key-value lines.",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    for line in settings.to_env_lines():
        print(line)
    return 0
