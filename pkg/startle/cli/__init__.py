"""
Command-line interface.
"""
from startle.cli.app import build_parser, run

__all__ = ["build_parser", "run"]
