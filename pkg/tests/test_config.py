from pathlib import Path

import pytest

from startle.core.config import Settings, load_settings, merge_section
from startle.core.exceptions import ConfigError
from startle.schemas.config import FEATURE_COUNT, TrackerConfig


def test_defaults_match_published_operating_point() -> None:
    settings = Settings()
    assert settings.fps == 10
    assert settings.clip_len == 40
    assert settings.tracker.gate_fraction == 0.15
    assert settings.tracker.max_missed_frames == 5
    assert settings.tracker.min_track_seconds == 2.0
    assert (settings.classifier.seq_len, FEATURE_COUNT) == (40, 4)
    assert settings.classifier.decision_threshold == 0.5
    assert settings.evaluation.threshold == 0.5


def test_config_file_overrides_defaults(tmp_path: Path) -> None:
    config = tmp_path / "startle.env"
    config.write_text("STARTLE_TRACKER__GATE_FRACTION=0.2\nSTARTLE_SEED=11\n", encoding="utf-8")

    settings = load_settings(config)

    assert settings.tracker.gate_fraction == 0.2
    assert settings.tracker.max_missed_frames == 5
    assert settings.seed == 11


def test_environment_beats_file_and_flag_beats_environment(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    config = tmp_path / "startle.env"
    config.write_text("STARTLE_SEED=1\nSTARTLE_JOBS=2\n", encoding="utf-8")
    monkeypatch.setenv("STARTLE_SEED", "3")

    assert load_settings(config).seed == 3
    assert load_settings(config).jobs == 2
    assert load_settings(config, seed=5).seed == 5


def test_none_overrides_are_ignored(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("STARTLE_JOBS", "4")
    assert load_settings(None, jobs=None).jobs == 4


def test_missing_config_file_is_a_config_error(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="not found"):
        load_settings(tmp_path / "absent.env")


def test_invalid_value_is_a_config_error(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("STARTLE_TRACKER__GATE_FRACTION", "2.5")
    with pytest.raises(ConfigError) as info:
        load_settings()
    assert info.value.exit_code == 2


def test_log_level_is_case_insensitive() -> None:
    assert load_settings(log_level="debug").log_level == "DEBUG"
    with pytest.raises(ConfigError):
        load_settings(log_level="chatty")


def test_rendered_settings_load_back_identically(tmp_path: Path) -> None:
    original = load_settings(seed=9, jobs=3)
    original = original.model_copy(
        update={"tracker": merge_section(original.tracker, gate_reference="width")}
    )
    config = tmp_path / "resolved.env"
    config.write_text("\n".join(original.to_env_lines()) + "\n", encoding="utf-8")

    reloaded = load_settings(config)

    assert "STARTLE_TRACKER__GATE_FRACTION=0.15" in original.to_env_lines()
    assert reloaded.model_dump() == original.model_dump()


def test_merge_section_validates_overrides() -> None:
    merged = merge_section(TrackerConfig(), max_missed_frames=7, gate_fraction=None)
    assert merged.max_missed_frames == 7
    assert merged.gate_fraction == 0.15
    with pytest.raises(ConfigError):
        merge_section(TrackerConfig(), max_missed_frames=0)


def test_gate_radius_follows_reference_side() -> None:
    tracker = TrackerConfig()
    assert tracker.gate_pixels(640, 480) == pytest.approx(0.15 * 800)
    assert TrackerConfig(gate_reference="width").gate_pixels(640, 480) == pytest.approx(96)
    assert TrackerConfig(gate_reference="height").gate_pixels(640, 480) == pytest.approx(72)
