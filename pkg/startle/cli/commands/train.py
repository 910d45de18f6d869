"""
Training command.
"""
import argparse
from typing import List

from startle.cli.deps import with_section
from startle.core.config import Settings
from startle.services.pipeline_service import run_train


def register(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "train", parents=parents, help="Train the track classifier on labeled features."
    )
    parser.add_argument("--epochs", type=int, help="Passes over the training set.")
    parser.add_argument("--batch-size", type=int, help="Mini-batch size.")
    parser.add_argument("--learning-rate", type=float, help="Adam step size.")
    parser.add_argument("--val-fraction", type=float,
                        help="Stratified hold-out used to pick the best epoch (0 disables).")
    parser.add_argument("--balanced", action="store_true",
                        help="Use all startle clips plus as many random non-startle clips.")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    settings = with_section(
        settings, "classifier",
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        val_fraction=args.val_fraction,
    )
    run_train(settings, balanced=args.balanced)
    return 0
