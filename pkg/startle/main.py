"""
Command-line entry point: ``python -m startle.main <command>``.
"""
import sys

from startle.cli.app import run


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
