"""
Feature repository: per-clip feature dumps.
"""
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

from startle.core.exceptions import RecordParseError
from startle.core.file_handler import read_csv_rows, write_csv
from startle.schemas.features import FEATURE_NAMES, FeatureSeries


FEATURE_HEADER = ("track_id", "frame_index") + FEATURE_NAMES


class FeatureRepository:
    """Repository for feature dump files."""

    def write_features(self, path: Path, series_list: List[FeatureSeries]) -> None:
        """
        Write one line per feature row, grouped by track.

        Args:
            path: Destination file
            series_list: Feature series of the clip's tracks
        """
        rows = [
            (series.track_id, int(frame)) + tuple(float(v) for v in row)
            for series in series_list
            for frame, row in zip(series.frame_indices, series.values)
        ]
        write_csv(path, rows, FEATURE_HEADER)

    def read_features(self, path: Path) -> List[FeatureSeries]:
        """
        Read a feature dump.

        Returns:
            List[FeatureSeries]: Series ordered by track_id

        Raises:
            MissingArtifactError: If the file is absent
            RecordParseError: If a line is malformed
        """
        grouped: Dict[int, List[Tuple[int, List[float]]]] = {}
        for line_number, row in enumerate(read_csv_rows(path, "featurize"), start=2):
            if len(row) != len(FEATURE_HEADER):
                raise RecordParseError(line_number, "malformed feature record", str(path))
            try:
                grouped.setdefault(int(row[0]), []).append(
                    (int(row[1]), [float(v) for v in row[2:]])
                )
            except ValueError as exc:
                raise RecordParseError(line_number, str(exc), str(path)) from exc

        series_list = []
        for track_id in sorted(grouped):
            rows = grouped[track_id]
            series_list.append(
                FeatureSeries(
                    track_id=track_id,
                    frame_indices=np.array([frame for frame, _ in rows], dtype=np.int64),
                    values=np.array([values for _, values in rows], dtype=np.float64),
                )
            )
        return series_list
