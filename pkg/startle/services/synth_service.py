"""
Synthetic dataset generator: swimming fish with injected startle events.
"""
import logging
import math
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.ndimage import gaussian_filter

from startle.core.workers import map_ordered
from startle.models.track import Track
from startle.repositories.dataset_repository import DatasetInfo, DatasetLabels, DatasetRepository
from startle.schemas.detection import Clip, Detection
from startle.schemas.scenario import ScenarioConfig


logger = logging.getLogger(__name__)

BODY_DEPTH_RATIO = 0.4
FISH_BRIGHTNESS = 0.9
BACKGROUND_LEVEL = 0.3
BACKGROUND_CONTRAST = 0.05
TEXTURE_SIGMA = 8.0


class FishTruth(BaseModel):
    """
    Ground-truth kinematics of one synthetic fish.

    ``speeds[t]`` and ``headings[t]`` describe the step from frame t-1 to
    frame t (entry 0 holds the initial values).
    """

    fish_id: int
    label: int
    cruise_speed: float
    speeds: List[float]
    headings: List[float]
    startle_onset: Optional[int] = None
    startle_turn: float = 0.0


class SyntheticClip(BaseModel):
    """One generated clip with its ground truth."""

    clip: Clip
    truth: List[Track]
    fish: List[FishTruth]
    label: int

    model_config = ConfigDict(arbitrary_types_allowed=True)

    @property
    def track_labels(self) -> Dict[int, int]:
        return {fish.fish_id: fish.label for fish in self.fish}


def clip_rng(seed: int, clip_index: int) -> np.random.Generator:
    """Generator for one clip, derived from the dataset seed and the clip index."""
    return np.random.default_rng(np.random.SeedSequence([seed, clip_index]))


def _reflect(value: float, lo: float, hi: float) -> Tuple[float, bool]:
    if value < lo:
        return 2.0 * lo - value, True
    if value > hi:
        return 2.0 * hi - value, True
    return value, False


def _simulate_fish(
    cfg: ScenarioConfig,
    rng: np.random.Generator,
    fish_id: int,
    startle: bool,
) -> Tuple[FishTruth, List[Detection]]:
    """Random-walk one fish over the clip; returns its truth and noiseless boxes."""
    length = rng.uniform(*cfg.fish_length)
    depth = length * BODY_DEPTH_RATIO
    margin_x = min(length / 2.0, cfg.frame_width / 4.0)
    margin_y = min(depth / 2.0, cfg.frame_height / 4.0)
    x = rng.uniform(margin_x, cfg.frame_width - margin_x)
    y = rng.uniform(margin_y, cfg.frame_height - margin_y)
    heading = rng.uniform(-math.pi, math.pi)
    cruise = rng.uniform(*cfg.cruise_speed)

    onset, turn = None, 0.0
    if startle:
        onset = int(rng.integers(1, cfg.clip_len - cfg.startle_frames + 1))
        turn = float(rng.choice([-1.0, 1.0]) * rng.uniform(*cfg.startle_turn))

    speeds, headings, boxes = [], [], []
    for t in range(cfg.clip_len):
        in_event = onset is not None and onset <= t < onset + cfg.startle_frames
        speed = cruise * cfg.startle_speed_multiplier if in_event else cruise
        if t > 0:
            if t == onset:
                heading += turn
            else:
                heading += rng.normal(0.0, cfg.turn_sigma) if cfg.turn_sigma > 0 else 0.0
            step = speed / cfg.fps
            x, flip_x = _reflect(x + step * math.cos(heading), margin_x, cfg.frame_width - margin_x)
            y, flip_y = _reflect(y + step * math.sin(heading), margin_y, cfg.frame_height - margin_y)
            if flip_x:
                heading = math.pi - heading
            if flip_y:
                heading = -heading
            heading = math.atan2(math.sin(heading), math.cos(heading))
        speeds.append(speed if t > 0 else cruise)
        headings.append(heading)

        aspect_scale = cfg.startle_aspect_drop if in_event else 1.0
        boxes.append(
            Detection(frame_index=t, cx=x, cy=y, w=length * aspect_scale, h=depth, confidence=1.0)
        )

    truth = FishTruth(
        fish_id=fish_id,
        label=int(startle),
        cruise_speed=cruise,
        speeds=speeds,
        headings=headings,
        startle_onset=onset,
        startle_turn=turn,
    )
    return truth, boxes


def _observe(
    cfg: ScenarioConfig, rng: np.random.Generator, box: Detection
) -> Optional[Detection]:
    """Apply detector jitter and misses to a true box."""
    if cfg.miss_rate > 0 and rng.random() < cfg.miss_rate:
        return None
    sigma = cfg.detection_noise_sigma
    if sigma > 0:
        cx = float(np.clip(box.cx + rng.normal(0.0, sigma), 0.0, cfg.frame_width))
        cy = float(np.clip(box.cy + rng.normal(0.0, sigma), 0.0, cfg.frame_height))
        w = max(1.0, box.w + rng.normal(0.0, sigma))
        h = max(1.0, box.h + rng.normal(0.0, sigma))
    else:
        cx, cy, w, h = box.cx, box.cy, box.w, box.h
    confidence = float(rng.uniform(0.6, 1.0))
    return Detection(frame_index=box.frame_index, cx=cx, cy=cy, w=w, h=h, confidence=confidence)


def _render(cfg: ScenarioConfig, rng: np.random.Generator, boxes: Sequence[List[Detection]]) -> np.ndarray:
    """Draw fish as bright ellipses over a static textured background."""
    texture = gaussian_filter(rng.normal(size=(cfg.frame_height, cfg.frame_width)), TEXTURE_SIGMA)
    spread = float(texture.std()) or 1.0
    background = BACKGROUND_LEVEL + BACKGROUND_CONTRAST * texture / spread
    yy, xx = np.mgrid[0:cfg.frame_height, 0:cfg.frame_width]

    pixels = np.empty((cfg.clip_len, cfg.frame_height, cfg.frame_width))
    for t in range(cfg.clip_len):
        frame = background.copy()
        for box in boxes[t]:
            inside = ((xx - box.cx) / (box.w / 2.0)) ** 2 + ((yy - box.cy) / (box.h / 2.0)) ** 2 <= 1.0
            frame[inside] = FISH_BRIGHTNESS
        if cfg.pixel_noise_sigma > 0:
            frame += rng.normal(0.0, cfg.pixel_noise_sigma, size=frame.shape)
        pixels[t] = np.clip(frame, 0.0, 1.0)
    return pixels


def generate_clip(cfg: ScenarioConfig, clip_index: int) -> SyntheticClip:
    """
    Generate one clip. Depends only on ``cfg`` and ``clip_index``.

    With ``startle_probability`` one uniformly chosen fish startles; every
    other fish of a positive clip then startles with
    ``multi_startle_probability``.

    Args:
        cfg: Scenario
        clip_index: Zero-based clip index

    Returns:
        SyntheticClip: Clip, truth tracks and labels
    """
    rng = clip_rng(cfg.seed, clip_index)
    n_fish = int(rng.integers(cfg.fish_per_clip[0], cfg.fish_per_clip[1] + 1))
    startles = [False] * n_fish
    if n_fish and rng.random() < cfg.startle_probability:
        startles[int(rng.integers(n_fish))] = True
        for i in range(n_fish):
            if not startles[i] and rng.random() < cfg.multi_startle_probability:
                startles[i] = True

    fish, truth = [], []
    true_boxes: List[List[Detection]] = [[] for _ in range(cfg.clip_len)]
    for fish_id, startle in enumerate(startles):
        record, boxes = _simulate_fish(cfg, rng, fish_id, startle)
        fish.append(record)
        truth.append(Track.from_entries(fish_id, [(box.frame_index, box) for box in boxes]))
        for box in boxes:
            true_boxes[box.frame_index].append(box)

    frames = []
    for t in range(cfg.clip_len):
        observed = [_observe(cfg, rng, box) for box in true_boxes[t]]
        frames.append([d for d in observed if d is not None])

    pixels = _render(cfg, rng, true_boxes) if cfg.render_frames else None
    clip = Clip(
        clip_id=f"{clip_index:06d}",
        fps=cfg.fps,
        frames=frames,
        frame_width=cfg.frame_width,
        frame_height=cfg.frame_height,
        pixels=pixels,
    )
    return SyntheticClip(clip=clip, truth=truth, fish=fish, label=int(any(startles)))


def generate(cfg: ScenarioConfig, jobs: int = 1) -> List[SyntheticClip]:
    """
    Generate ``cfg.n_clips`` clips.

    Args:
        cfg: Scenario
        jobs: Worker processes; the result does not depend on it

    Returns:
        List[SyntheticClip]: Clips in index order
    """
    clips = map_ordered(partial(generate_clip, cfg), range(cfg.n_clips), jobs)
    positives = sum(c.label for c in clips)
    logger.info("Generated %d clips (%d with a startle)", len(clips), positives)
    return clips


def match_tracks_to_truth(
    predicted: Sequence[Track],
    truth: Sequence[Track],
    truth_labels: Dict[int, int],
    max_distance: float,
) -> Dict[int, int]:
    """
    Label predicted tracks from ground-truth tracks of the same clip.

    A predicted track inherits the label of the truth track it shares the
    most frames with, counting a frame when both have an entry there and
    their centers are closer than ``max_distance``. Ties go to the lowest
    truth id; tracks sharing no frame with any truth track are negative.

    Args:
        predicted: Tracker output
        truth: Ground-truth tracks
        truth_labels: 0/1 label per truth track id
        max_distance: Center distance gate in pixels

    Returns:
        Dict[int, int]: Label per predicted track id
    """
    truth_centers = {
        track.track_id: {frame: (d.cx, d.cy) for frame, d in track.entries} for track in truth
    }
    labels = {}
    for track in predicted:
        best_id, best_count = None, 0
        for truth_id in sorted(truth_centers):
            centers = truth_centers[truth_id]
            count = 0
            for frame, d in track.entries:
                center = centers.get(frame)
                if center is not None and math.hypot(d.cx - center[0], d.cy - center[1]) < max_distance:
                    count += 1
            if count > best_count:
                best_id, best_count = truth_id, count
        labels[track.track_id] = truth_labels.get(best_id, 0) if best_id is not None else 0
    return labels


def split_balanced(labels: Dict[str, int], seed: int = 0) -> List[str]:
    """
    Pick an equal number of positive and negative clips.

    The larger class is randomly subsampled down to the size of the smaller.

    Args:
        labels: 0/1 label per clip id
        seed: Subsampling seed

    Returns:
        List[str]: Selected clip ids, sorted
    """
    rng = np.random.default_rng(seed)
    positives = sorted(cid for cid, label in labels.items() if label)
    negatives = sorted(cid for cid, label in labels.items() if not label)
    n = min(len(positives), len(negatives))
    chosen = []
    for group in (positives, negatives):
        picks = rng.permutation(len(group))[:n]
        chosen.extend(group[i] for i in picks)
    return sorted(chosen)


def write_dataset(root: Path, cfg: ScenarioConfig, clips: Sequence[SyntheticClip]) -> DatasetRepository:
    """
    Persist generated clips as a dataset directory.

    Args:
        root: Dataset directory
        cfg: Scenario the clips came from
        clips: Generated clips

    Returns:
        DatasetRepository: Repository over the written dataset
    """
    repository = DatasetRepository(root)
    repository.write_info(
        DatasetInfo(
            fps=cfg.fps,
            clip_len=cfg.clip_len,
            frame_width=cfg.frame_width,
            frame_height=cfg.frame_height,
        )
    )
    labels = DatasetLabels()
    for synthetic in clips:
        repository.write_clip(synthetic.clip, synthetic.truth)
        clip_id = synthetic.clip.clip_id
        labels.clips[clip_id] = synthetic.label
        for fish_id, label in synthetic.track_labels.items():
            labels.tracks[(clip_id, fish_id)] = label
    repository.write_labels(labels)
    logger.info("Wrote %d clips to %s", len(clips), root)
    return repository


def read_dataset(root: Path, with_pixels: bool = True) -> Tuple[DatasetInfo, List[Clip], DatasetLabels]:
    """
    Load every clip of a dataset directory along with its labels.

    Args:
        root: Dataset directory
        with_pixels: Load frames when present

    Returns:
        Tuple[DatasetInfo, List[Clip], DatasetLabels]: Geometry, clips by id, labels
    """
    repository = DatasetRepository(root)
    info = repository.read_info()
    clips = [repository.read_clip(cid, info, with_pixels) for cid in repository.list_clip_ids()]
    return info, clips, repository.read_labels()
