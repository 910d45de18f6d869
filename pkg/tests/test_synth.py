import math

import numpy as np
import pytest
from pydantic import ValidationError

from startle.models.track import Track
from startle.schemas.config import TrackerConfig
from startle.schemas.scenario import ScenarioConfig
from startle.services.synth_service import (
    BODY_DEPTH_RATIO,
    generate,
    generate_clip,
    match_tracks_to_truth,
    read_dataset,
    split_balanced,
    write_dataset,
)
from startle.services.tracker_service import TrackerService

from helpers import make_detection


def _noiseless(**overrides) -> ScenarioConfig:
    return ScenarioConfig(detection_noise_sigma=0.0, miss_rate=0.0, **overrides)


def _track(track_id: int, points, start: int = 0) -> Track:
    return Track.from_entries(
        track_id, [(start + t, make_detection(start + t, x, y)) for t, (x, y) in enumerate(points)]
    )


def test_zero_startle_probability_gives_only_negatives() -> None:
    clips = generate(ScenarioConfig(n_clips=30, startle_probability=0.0, seed=4))

    assert all(c.label == 0 for c in clips)
    assert all(f.label == 0 and f.startle_onset is None for c in clips for f in c.fish)


def test_generation_is_deterministic_per_clip() -> None:
    cfg = ScenarioConfig(n_clips=6, seed=11)

    first, second = generate(cfg), generate(cfg)

    for a, b in zip(first, second):
        assert a.clip.frames == b.clip.frames
        assert a.fish == b.fish
    assert generate_clip(cfg, 4).clip.frames == first[4].clip.frames


def test_different_seeds_differ() -> None:
    a = generate_clip(ScenarioConfig(seed=1), 0)
    b = generate_clip(ScenarioConfig(seed=2), 0)
    assert a.clip.frames != b.clip.frames


def test_worker_count_does_not_change_output() -> None:
    cfg = ScenarioConfig(n_clips=4, seed=5)
    for a, b in zip(generate(cfg, jobs=1), generate(cfg, jobs=2)):
        assert a.clip.frames == b.clip.frames


def test_fish_count_stays_in_range() -> None:
    for synthetic in generate(ScenarioConfig(n_clips=40, fish_per_clip=(2, 4), seed=3)):
        assert 2 <= len(synthetic.fish) <= 4
        assert len(synthetic.truth) == len(synthetic.fish)


def test_startle_events_follow_the_scenario() -> None:
    cfg = _noiseless(n_clips=60, startle_probability=1.0, multi_startle_probability=0.5, seed=8)
    n_event = cfg.startle_frames

    for synthetic in generate(cfg):
        assert synthetic.label == 1
        assert any(f.label for f in synthetic.fish)
        for fish, truth in zip(synthetic.fish, synthetic.truth):
            widths = [d.w for _, d in truth.entries]
            depth = truth.entries[0][1].h
            if not fish.label:
                assert all(s == fish.cruise_speed for s in fish.speeds)
                assert all(w == pytest.approx(depth / BODY_DEPTH_RATIO) for w in widths)
                continue
            onset = fish.startle_onset
            assert 1 <= onset <= cfg.clip_len - n_event
            assert cfg.startle_turn[0] <= abs(fish.startle_turn) <= cfg.startle_turn[1]
            for t, speed in enumerate(fish.speeds):
                burst = onset <= t < onset + n_event
                expected = fish.cruise_speed * (cfg.startle_speed_multiplier if burst else 1.0)
                assert speed == pytest.approx(expected)
                scale = cfg.startle_aspect_drop if burst else 1.0
                assert widths[t] == pytest.approx(scale * depth / BODY_DEPTH_RATIO)


def test_startle_filling_the_whole_clip_is_rejected() -> None:
    with pytest.raises(ValidationError, match="before its onset"):
        ScenarioConfig(clip_len=10, fps=10, startle_seconds=1.0)


def test_longest_startle_starts_on_frame_one() -> None:
    cfg = _noiseless(clip_len=11, fps=10, startle_seconds=1.0, startle_probability=1.0,
                     fish_per_clip=(1, 1), seed=5)

    fish = generate_clip(cfg, 0).fish[0]

    assert fish.label == 1
    assert fish.startle_onset == 1


def test_noiseless_fish_stay_inside_the_frame() -> None:
    cfg = _noiseless(n_clips=20, seed=9)
    for synthetic in generate(cfg):
        for frame in synthetic.clip.frames:
            for d in frame:
                assert 0 <= d.cx <= cfg.frame_width and 0 <= d.cy <= cfg.frame_height


def test_positive_fraction_tracks_startle_probability() -> None:
    n, p = 500, 0.5
    clips = generate(ScenarioConfig(n_clips=n, startle_probability=p, seed=21))

    fraction = sum(c.label for c in clips) / n

    assert abs(fraction - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_miss_rate_drops_detections() -> None:
    cfg = ScenarioConfig(n_clips=20, fish_per_clip=(2, 2), miss_rate=0.3, seed=6)
    observed = sum(c.clip.detection_count() for c in generate(cfg))
    expected = 20 * 2 * cfg.clip_len * (1 - cfg.miss_rate)
    assert abs(observed - expected) < 0.1 * expected


def test_single_noiseless_fish_is_tracked_and_labelled() -> None:
    cfg = _noiseless(n_clips=1, fish_per_clip=(1, 1), startle_probability=1.0, seed=2)
    synthetic = generate_clip(cfg, 0)
    tracker_cfg = TrackerConfig()

    tracks = TrackerService(tracker_cfg).track_clip(synthetic.clip)
    labels = match_tracks_to_truth(
        tracks, synthetic.truth, synthetic.track_labels,
        tracker_cfg.gate_pixels(cfg.frame_width, cfg.frame_height),
    )

    assert len(tracks) == 1
    assert len(tracks[0]) == cfg.clip_len
    assert labels == {tracks[0].track_id: 1}


def test_tracker_recovers_noiseless_fish() -> None:
    cfg = _noiseless(n_clips=200, seed=13)
    tracker_cfg = TrackerConfig()
    gate = tracker_cfg.gate_pixels(cfg.frame_width, cfg.frame_height)
    total = recovered = 0

    for synthetic in generate(cfg):
        tracks = TrackerService(tracker_cfg).track_clip(synthetic.clip)
        # encode each fish id as its own label to see which fish a track found
        ids = {fish.fish_id: fish.fish_id + 1 for fish in synthetic.fish}
        found = match_tracks_to_truth(tracks, synthetic.truth, ids, gate)
        total += len(synthetic.fish)
        recovered += len({value for value in found.values() if value})

    assert recovered / total >= 0.99


def test_predicted_track_takes_majority_truth_label() -> None:
    truth = [_track(0, [(100, 100)] * 10), _track(1, [(300, 100)] * 10)]
    predicted = [
        _track(5, [(100, 101)] * 3 + [(300, 101)] * 7),
        _track(6, [(500, 400)] * 10),
    ]

    labels = match_tracks_to_truth(predicted, truth, {0: 0, 1: 1}, max_distance=10)

    assert labels == {5: 1, 6: 0}


def test_match_ties_go_to_lowest_truth_id() -> None:
    truth = [_track(0, [(100, 100)] * 4), _track(1, [(120, 100)] * 4)]
    predicted = [_track(0, [(110, 100)] * 4)]

    assert match_tracks_to_truth(predicted, truth, {0: 1, 1: 0}, max_distance=20) == {0: 1}
    assert match_tracks_to_truth(predicted, truth, {0: 0, 1: 1}, max_distance=20) == {0: 0}


def test_match_requires_temporal_overlap() -> None:
    truth = [_track(0, [(100, 100)] * 5)]
    predicted = [_track(0, [(100, 100)] * 5, start=10)]
    assert match_tracks_to_truth(predicted, truth, {0: 1}, max_distance=10) == {0: 0}


def test_balanced_split_has_equal_classes() -> None:
    labels = {f"{i:03d}": int(i % 4 == 0) for i in range(40)}

    chosen = split_balanced(labels, seed=1)

    assert chosen == sorted(chosen)
    assert sum(labels[c] for c in chosen) == 10
    assert len(chosen) == 20
    assert split_balanced(labels, seed=1) == chosen


def test_balanced_split_of_one_class_is_empty() -> None:
    assert split_balanced({"a": 1, "b": 1}) == []


def test_rendered_frames_show_the_fish() -> None:
    cfg = _noiseless(n_clips=1, fish_per_clip=(1, 1), frame_width=96, frame_height=64,
                     fish_length=(20.0, 30.0), cruise_speed=(5.0, 10.0), render_frames=True,
                     pixel_noise_sigma=0.0, seed=1)
    synthetic = generate_clip(cfg, 0)
    pixels = synthetic.clip.pixels

    assert pixels.shape == (cfg.clip_len, 64, 96)
    assert pixels.min() >= 0.0 and pixels.max() <= 1.0
    first = synthetic.truth[0].entries[0][1]
    assert pixels[0, int(first.cy), int(first.cx)] == pytest.approx(0.9)


def test_dataset_round_trip(tmp_path) -> None:
    cfg = ScenarioConfig(n_clips=3, frame_width=64, frame_height=48, fish_length=(10.0, 16.0),
                         cruise_speed=(5.0, 10.0), render_frames=True, seed=3)
    clips = generate(cfg)

    write_dataset(tmp_path, cfg, clips)
    info, loaded, labels = read_dataset(tmp_path)

    assert (info.clip_len, info.frame_width, info.frame_height) == (40, 64, 48)
    assert [c.clip_id for c in loaded] == ["000000", "000001", "000002"]
    for original, restored in zip(clips, loaded):
        assert restored.frames == original.clip.frames
        np.testing.assert_allclose(restored.pixels, original.clip.pixels, atol=1 / 510 + 1e-12)
        assert labels.clips[restored.clip_id] == original.label
        for fish_id, label in original.track_labels.items():
            assert labels.tracks[(restored.clip_id, fish_id)] == label


def test_written_dataset_is_byte_identical(tmp_path) -> None:
    cfg = ScenarioConfig(n_clips=3, seed=17)
    write_dataset(tmp_path / "a", cfg, generate(cfg))
    write_dataset(tmp_path / "b", cfg, generate(cfg))

    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())

    assert files_a == files_b
    for name in files_a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
