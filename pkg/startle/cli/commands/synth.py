"""
Synthetic dataset command.
"""
import argparse
import logging
from pathlib import Path
from typing import List

from startle.cli.deps import build_model
from startle.core.config import Settings
from startle.schemas.scenario import ScenarioConfig
from startle.services.pipeline_service import run_synth


logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction, parents: List[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "synth", parents=parents, help="Generate a labeled synthetic clip dataset."
    )
    parser.add_argument("--output", type=Path,
                        help="Dataset directory to write (default: the --dataset directory).")
    parser.add_argument("--n-clips", type=int, help="Number of clips.")
    parser.add_argument("--fish-per-clip", type=int, nargs=2, metavar=("MIN", "MAX"),
                        help="Fish count range per clip.")
    parser.add_argument("--startle-probability", type=float,
                        help="Probability that a clip contains a startle.")
    parser.add_argument("--multi-startle-probability", type=float,
                        help="Probability that each further fish of a startle clip also startles.")
    parser.add_argument("--startle-speed-multiplier", type=float, help="Speed factor during a startle.")
    parser.add_argument("--noise-sigma", dest="detection_noise_sigma", type=float,
                        help="Detection center jitter (px).")
    parser.add_argument("--miss-rate", type=float, help="Probability a detection is dropped.")
    parser.add_argument("--frame-size", type=int, nargs=2, metavar=("WIDTH", "HEIGHT"),
                        help="Frame size in pixels.")
    parser.add_argument("--render-frames", action="store_true", default=None,
                        help="Also write grayscale PGM frames.")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    width, height = args.frame_size if args.frame_size else (None, None)
    scenario = build_model(
        ScenarioConfig,
        seed=settings.seed,
        fps=settings.fps,
        clip_len=settings.clip_len,
        n_clips=args.n_clips,
        fish_per_clip=tuple(args.fish_per_clip) if args.fish_per_clip else None,
        startle_probability=args.startle_probability,
        multi_startle_probability=args.multi_startle_probability,
        startle_speed_multiplier=args.startle_speed_multiplier,
        detection_noise_sigma=args.detection_noise_sigma,
        miss_rate=args.miss_rate,
        frame_width=width,
        frame_height=height,
        render_frames=args.render_frames,
    )
    output = args.output or settings.dataset_dir
    count = run_synth(settings, scenario, output)
    logger.info("Dataset with %d clips written to %s", count, output)
    return 0
