"""
Pydantic schemas for pipeline records and configuration.
"""
from startle.schemas.common import ArrayModel, TrackLabel
from startle.schemas.detection import Detection, Clip
from startle.schemas.config import (
    MotionGateConfig, TrackerConfig, ClassifierConfig, EvaluationConfig
)
from startle.schemas.scenario import ScenarioConfig
from startle.schemas.features import LmcmKernel, FeatureSeries, TrackSummary, FEATURE_NAMES
from startle.schemas.classifier import (
    NormalizationCoefficients, TrackTensor, LabeledTensor, TrainingResult, Classification
)
from startle.schemas.evaluation import (
    ScoredItem, TrackScore, ClipLabel, PrecisionRecallPoint, EvalReport
)

__all__ = [
    "ArrayModel", "TrackLabel",
    "Detection", "Clip",
    "MotionGateConfig", "TrackerConfig", "ClassifierConfig", "EvaluationConfig",
    "ScenarioConfig",
    "LmcmKernel", "FeatureSeries", "TrackSummary", "FEATURE_NAMES",
    "NormalizationCoefficients", "TrackTensor", "LabeledTensor", "TrainingResult",
    "Classification",
    "ScoredItem", "TrackScore", "ClipLabel", "PrecisionRecallPoint", "EvalReport",
]
