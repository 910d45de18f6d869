"""
Service layer for the pipeline stages.
"""
from startle.services.tracker_service import TrackerService
from startle.services.feature_service import FeatureService
from startle.services.classifier_service import ClassifierService

__all__ = ["TrackerService", "FeatureService", "ClassifierService"]
