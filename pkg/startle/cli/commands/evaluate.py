"""
Evaluation command (``eval``).
"""
import argparse
from typing import List

from startle.cli.deps import with_section
from startle.core.config import Settings
from startle.repositories.report_repository import render_report
from startle.services.pipeline_service import run_eval


def register(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "eval", parents=parents, help="Compute AP, BCE and recall against ground truth."
    )
    parser.add_argument("--threshold", type=float, help="Operating point for recall.")
    parser.add_argument("--ap-variant", choices=("step", "interpolated"),
                        help="Average precision definition.")
    parser.add_argument("--pr-curve", action="store_true", default=None,
                        help="Also write precision-recall curves as CSV.")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    settings = with_section(
        settings, "evaluation",
        threshold=args.threshold,
        ap_variant=args.ap_variant,
        pr_curve=args.pr_curve,
    )
    report = run_eval(settings)
    print(render_report(report), end="")
    return 0
