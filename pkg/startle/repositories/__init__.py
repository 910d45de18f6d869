"""
Repository layer for artifact files.
"""
from startle.repositories.detection_repository import DetectionRepository
from startle.repositories.track_repository import TrackRepository
from startle.repositories.feature_repository import FeatureRepository
from startle.repositories.model_repository import ModelRepository
from startle.repositories.dataset_repository import DatasetRepository, DatasetInfo, DatasetLabels
from startle.repositories.report_repository import ReportRepository

__all__ = [
    "DetectionRepository", "TrackRepository", "FeatureRepository", "ModelRepository",
    "DatasetRepository", "DatasetInfo", "DatasetLabels", "ReportRepository",
]
