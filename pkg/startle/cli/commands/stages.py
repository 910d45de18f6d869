"""
Per-clip stage commands without options of their own: gate, track, featurize.
"""
import argparse
from typing import List

from startle.core.config import Settings
from startle.services.pipeline_service import run_featurize, run_gate, run_track


def register(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    gate = subparsers.add_parser(
        "gate", parents=parents, help="Discard clips without motion (needs frames)."
    )
    gate.set_defaults(handler=handle_gate)

    track = subparsers.add_parser(
        "track", parents=parents, help="Link detections into tracks for every clip."
    )
    track.set_defaults(handler=handle_track)

    featurize = subparsers.add_parser(
        "featurize", parents=parents, help="Compute per-frame features of every track."
    )
    featurize.set_defaults(handler=handle_featurize)


def handle_gate(args: argparse.Namespace, settings: Settings) -> int:
    run_gate(settings)
    return 0


def handle_track(args: argparse.Namespace, settings: Settings) -> int:
    run_track(settings)
    return 0


def handle_featurize(args: argparse.Namespace, settings: Settings) -> int:
    run_featurize(settings)
    return 0
