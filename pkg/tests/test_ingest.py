from pathlib import Path

import numpy as np
import pytest

from startle.core.exceptions import DataValidationError, RecordParseError
from startle.repositories.detection_repository import DetectionRepository
from startle.services.ingest_service import segment_clips

from helpers import make_detection


def _stream(n_frames: int):
    return [[make_detection(t, 10.0 + t, 20.0)] for t in range(n_frames)]


def test_segment_drops_remainder_and_rebases_frames() -> None:
    clips = segment_clips(_stream(95), None, 10.0, 40, 640, 480)

    assert [clip.clip_id for clip in clips] == ["000000", "000001"]
    assert all(clip.length == 40 for clip in clips)
    second = clips[1]
    assert second.frames[0][0].frame_index == 0
    assert second.frames[0][0].cx == pytest.approx(50.0)
    assert second.frames[39][0].frame_index == 39


def test_segment_slices_pixels_alongside_detections() -> None:
    pixels = np.random.default_rng(0).random((80, 6, 8))
    clips = segment_clips(_stream(70), pixels, 10.0, 40, 8, 6)

    assert len(clips) == 2
    np.testing.assert_array_equal(clips[1].pixels, pixels[40:80])
    assert clips[1].frames[35] == []


def test_segment_rejects_bad_clip_length_and_short_pixels() -> None:
    with pytest.raises(DataValidationError):
        segment_clips(_stream(10), None, 10.0, 0, 640, 480)
    with pytest.raises(DataValidationError):
        segment_clips(_stream(10), np.zeros((5, 4, 4)), 10.0, 5, 4, 4)


def test_detections_round_trip_through_file(tmp_path: Path) -> None:
    repository = DetectionRepository(640, 480)
    frames = [[make_detection(0, 1.5, 2.25)], [], [make_detection(2, 3.0, 4.0), make_detection(2, 5.0, 6.0)]]
    path = tmp_path / "detections.csv"

    repository.write_detections(path, frames)
    loaded = repository.load_detections(path, n_frames=4)

    assert len(loaded) == 4
    assert loaded[:3] == frames
    assert loaded[3] == []


def test_detection_file_without_header_is_accepted(tmp_path: Path) -> None:
    path = tmp_path / "detections.csv"
    path.write_text("0,10,10,4,2,0.5\n\n1,11,10,4,2,0.5\n", encoding="utf-8")

    frames = DetectionRepository(640, 480).load_detections(path)

    assert [len(frame) for frame in frames] == [1, 1]


def test_malformed_record_names_its_line(tmp_path: Path) -> None:
    path = tmp_path / "detections.csv"
    path.write_text("frame_index,cx,cy,w,h,confidence\n0,10,10,4,2,0.5\n1,abc,10,4,2,0.5\n",
                    encoding="utf-8")

    with pytest.raises(RecordParseError) as info:
        DetectionRepository(640, 480).load_detections(path)
    assert info.value.line_number == 3


def test_empty_detection_file_has_no_frames(tmp_path: Path) -> None:
    path = tmp_path / "detections.csv"
    path.write_text("", encoding="utf-8")

    assert DetectionRepository(640, 480).load_detections(path) == []


def test_records_are_grouped_into_frame_slots(tmp_path: Path) -> None:
    path = tmp_path / "detections.csv"
    path.write_text("0,10,10,4,2,0.5\n0,20,10,4,2,0.5\n3,30,10,4,2,0.5\n", encoding="utf-8")

    frames = DetectionRepository(640, 480).load_detections(path)

    assert [len(frame) for frame in frames] == [2, 0, 0, 1]


def test_confidence_above_one_is_rejected_with_its_line(tmp_path: Path) -> None:
    path = tmp_path / "detections.csv"
    path.write_text("frame_index,cx,cy,w,h,confidence\n0,10,10,4,2,0.5\n1,10,10,4,2,1.3\n",
                    encoding="utf-8")

    with pytest.raises(DataValidationError, match=r":3: invalid detection"):
        DetectionRepository(640, 480).load_detections(path)


def test_out_of_frame_center_is_rejected(tmp_path: Path) -> None:
    path = tmp_path / "detections.csv"
    path.write_text("0,700,10,4,2,0.5\n", encoding="utf-8")

    with pytest.raises(DataValidationError, match="outside"):
        DetectionRepository(640, 480).load_detections(path)


def test_non_positive_box_is_rejected(tmp_path: Path) -> None:
    path = tmp_path / "detections.csv"
    path.write_text("0,10,10,0,2,0.5\n", encoding="utf-8")

    with pytest.raises(DataValidationError):
        DetectionRepository(640, 480).load_detections(path)


def test_frames_round_trip_at_8_bit_precision(tmp_path: Path) -> None:
    repository = DetectionRepository(8, 6)
    pixels = np.random.default_rng(1).random((3, 6, 8))

    repository.write_frames(tmp_path / "frames", pixels)
    loaded = repository.load_frames(tmp_path / "frames", n_frames=3)

    assert loaded.shape == (3, 6, 8)
    np.testing.assert_allclose(loaded, pixels, atol=0.5 / 255 + 1e-12)


def test_missing_frame_directory_means_no_pixels(tmp_path: Path) -> None:
    assert DetectionRepository(8, 6).load_frames(tmp_path / "frames") is None


def test_gap_in_frame_numbering_is_rejected(tmp_path: Path) -> None:
    repository = DetectionRepository(8, 6)
    repository.write_frames(tmp_path / "frames", np.zeros((3, 6, 8)))
    (tmp_path / "frames" / "frame_000001.pgm").unlink()

    with pytest.raises(DataValidationError, match="missing"):
        repository.load_frames(tmp_path / "frames")


def test_frame_of_wrong_size_is_rejected(tmp_path: Path) -> None:
    DetectionRepository(8, 6).write_frames(tmp_path / "frames", np.zeros((2, 6, 8)))

    with pytest.raises(DataValidationError, match="differs"):
        DetectionRepository(10, 6).load_frames(tmp_path / "frames")
