"""
Segmentation command: long detection stream to clip directories.
"""
import argparse
from pathlib import Path
from typing import List

from startle.core.config import Settings
from startle.services.pipeline_service import run_segment


def register(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "segment", parents=parents,
        help="Cut a detection stream (and optional frames) into fixed-length clips.",
    )
    parser.add_argument("detections", type=Path, help="Detection file of the whole stream.")
    parser.add_argument("--frames", type=Path, help="Directory of frame_%%06d.pgm files.")
    parser.add_argument("--frame-size", type=int, nargs=2, metavar=("WIDTH", "HEIGHT"),
                        default=(640, 480), help="Frame size in pixels.")
    parser.add_argument("--output", type=Path,
                        help="Dataset directory to write (default: the --dataset directory).")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    width, height = args.frame_size
    run_segment(settings, args.detections, args.frames, width, height,
                args.output or settings.dataset_dir)
    return 0
