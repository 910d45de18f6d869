"""
Pipeline service: runs each stage over a dataset directory and a workdir.

Workdir layout::

    gate.csv               clip_id,keep
    tracks/<clip>.csv      track dumps
    track_labels.csv       clip_id,track_id,label (datasets with truth only)
    features/<clip>.csv    feature dumps
    model.bin              ModelBundle
    loss_curve.csv         epoch,train_bce[,val_bce]
    track_scores.csv       per-track scores and movement summaries
    clip_scores.csv        per-clip scores
    report.txt, items.csv, pr_curve_track.csv, pr_curve_clip.csv
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from startle.core.config import Settings
from startle.core.exceptions import DataValidationError, MissingPixelsError
from startle.core.file_handler import ensure_dir, require_file
from startle.core.workers import map_ordered
from startle.repositories.dataset_repository import DatasetInfo, DatasetRepository
from startle.repositories.detection_repository import DetectionRepository
from startle.repositories.feature_repository import FeatureRepository
from startle.repositories.model_repository import ModelRepository
from startle.repositories.report_repository import ReportRepository
from startle.repositories.track_repository import TrackRepository
from startle.schemas.classifier import LabeledTensor, TrainingResult
from startle.schemas.common import TrackLabel
from startle.schemas.evaluation import ClipLabel, EvalReport, TrackScore
from startle.schemas.features import TrackSummary
from startle.schemas.scenario import ScenarioConfig
from startle.services import classifier_service, evaluation_service, synth_service
from startle.services.feature_service import FeatureService, build_lmcm_kernel, describe_track
from startle.services.ingest_service import motion_gate, segment_clips
from startle.services.synth_service import match_tracks_to_truth, split_balanced
from startle.services.tracker_service import TrackerService


logger = logging.getLogger(__name__)


class Workdir:
    """Paths of the stage artifacts inside a working directory."""

    def __init__(self, root: Path):
        self.root = Path(root)

    @property
    def gate(self) -> Path:
        return self.root / "gate.csv"

    def tracks(self, clip_id: str) -> Path:
        return self.root / "tracks" / f"{clip_id}.csv"

    @property
    def track_labels(self) -> Path:
        return self.root / "track_labels.csv"

    def features(self, clip_id: str) -> Path:
        return self.root / "features" / f"{clip_id}.csv"

    @property
    def model(self) -> Path:
        return self.root / "model.bin"

    @property
    def loss_curve(self) -> Path:
        return self.root / "loss_curve.csv"

    @property
    def track_scores(self) -> Path:
        return self.root / "track_scores.csv"

    @property
    def clip_scores(self) -> Path:
        return self.root / "clip_scores.csv"

    @property
    def report(self) -> Path:
        return self.root / "report.txt"

    @property
    def items(self) -> Path:
        return self.root / "items.csv"

    def pr_curve(self, level: str) -> Path:
        return self.root / f"pr_curve_{level}.csv"


def selected_clip_ids(dataset: DatasetRepository, workdir: Workdir) -> List[str]:
    """Clip ids of the dataset, minus those discarded by ``gate.csv`` if it exists."""
    clip_ids = dataset.list_clip_ids()
    if not workdir.gate.exists():
        return clip_ids
    decisions = ReportRepository().read_gate(workdir.gate)
    return [clip_id for clip_id in clip_ids if decisions.get(clip_id, True)]


def run_synth(settings: Settings, scenario: ScenarioConfig, output: Path) -> int:
    """
    Generate a synthetic dataset into ``output``.

    Returns:
        int: Number of clips written
    """
    clips = synth_service.generate(scenario, settings.jobs)
    synth_service.write_dataset(output, scenario, clips)
    return len(clips)


def run_segment(
    settings: Settings,
    detections_path: Path,
    frames_dir: Optional[Path],
    frame_width: int,
    frame_height: int,
    output: Path,
) -> int:
    """
    Cut a long detection stream (and optional frames) into clip directories.

    Returns:
        int: Number of clips written
    """
    reader = DetectionRepository(frame_width, frame_height)
    frames = reader.load_detections(require_file(Path(detections_path)))
    pixels = reader.load_frames(frames_dir) if frames_dir is not None else None
    clips = segment_clips(frames, pixels, settings.fps, settings.clip_len, frame_width, frame_height)

    dataset = DatasetRepository(output)
    dataset.write_info(
        DatasetInfo(
            fps=settings.fps,
            clip_len=settings.clip_len,
            frame_width=frame_width,
            frame_height=frame_height,
        )
    )
    for clip in clips:
        dataset.write_clip(clip)
    return len(clips)


def _gate_one(job: Tuple[Path, DatasetInfo, str, Settings]) -> Tuple[str, bool]:
    dataset_dir, info, clip_id, settings = job
    clip = DatasetRepository(dataset_dir).read_clip(clip_id, info, with_pixels=True)
    try:
        return clip_id, motion_gate(clip, settings.gate)
    except MissingPixelsError as exc:
        logger.warning("%s; keeping clip", exc.detail)
        return clip_id, True


def run_gate(settings: Settings) -> Dict[str, bool]:
    """
    Motion-gate every clip and write ``gate.csv``.

    Clips without frames are kept.
    """
    dataset = DatasetRepository(settings.dataset_dir)
    info = dataset.read_info()
    workdir = Workdir(settings.workdir)
    jobs = [(settings.dataset_dir, info, clip_id, settings) for clip_id in dataset.list_clip_ids()]
    decisions = dict(map_ordered(_gate_one, jobs, settings.jobs))
    ReportRepository().write_gate(workdir.gate, decisions)
    kept = sum(decisions.values())
    logger.info("Motion gate kept %d of %d clips", kept, len(decisions))
    return decisions


def _track_one(
    job: Tuple[Path, Path, DatasetInfo, str, Settings, Dict[int, int]]
) -> List[Tuple[str, int, int]]:
    dataset_dir, workdir_root, info, clip_id, settings, truth_labels = job
    dataset = DatasetRepository(dataset_dir)
    clip = dataset.read_clip(clip_id, info, with_pixels=False)
    tracks = TrackerService(settings.tracker).track_clip(clip)
    TrackRepository().write_tracks(Workdir(workdir_root).tracks(clip_id), tracks)

    if not dataset.has_truth(clip_id):
        return []
    labels = match_tracks_to_truth(
        tracks,
        dataset.read_truth(clip_id),
        truth_labels,
        settings.tracker.gate_pixels(info.frame_width, info.frame_height),
    )
    return [(clip_id, track_id, labels[track_id]) for track_id in sorted(labels)]


def run_track(settings: Settings) -> int:
    """
    Track every selected clip; label the tracks when the dataset has truth.

    Returns:
        int: Number of clips tracked
    """
    dataset = DatasetRepository(settings.dataset_dir)
    info = dataset.read_info()
    workdir = Workdir(settings.workdir)
    ensure_dir(workdir.root / "tracks")
    clip_ids = selected_clip_ids(dataset, workdir)
    truth_labels: Dict[str, Dict[int, int]] = {}
    if (dataset.root / "labels.csv").exists():
        for (clip_id, track_id), label in dataset.read_labels().tracks.items():
            truth_labels.setdefault(clip_id, {})[track_id] = label
    jobs = [
        (settings.dataset_dir, settings.workdir, info, clip_id, settings, truth_labels.get(clip_id, {}))
        for clip_id in clip_ids
    ]
    label_rows = [row for rows in map_ordered(_track_one, jobs, settings.jobs) for row in rows]
    if label_rows or any(dataset.has_truth(clip_id) for clip_id in clip_ids):
        TrackRepository().write_track_labels(workdir.track_labels, label_rows)
    logger.info("Tracked %d clips", len(clip_ids))
    return len(clip_ids)


def _featurize_one(job: Tuple[Path, Path, DatasetInfo, str, Settings]) -> int:
    dataset_dir, workdir_root, info, clip_id, settings = job
    workdir = Workdir(workdir_root)
    clip = DatasetRepository(dataset_dir).read_clip(clip_id, info, with_pixels=True)
    tracks = TrackRepository().read_tracks(workdir.tracks(clip_id))
    series = FeatureService(build_lmcm_kernel(settings.kernel)).featurize_clip(clip, tracks)
    FeatureRepository().write_features(workdir.features(clip_id), series)
    return len(series)


def run_featurize(settings: Settings) -> int:
    """
    Compute features for every tracked clip.

    Returns:
        int: Number of feature series written
    """
    dataset = DatasetRepository(settings.dataset_dir)
    info = dataset.read_info()
    workdir = Workdir(settings.workdir)
    ensure_dir(workdir.root / "features")
    jobs = [
        (settings.dataset_dir, settings.workdir, info, clip_id, settings)
        for clip_id in selected_clip_ids(dataset, workdir)
    ]
    total = sum(map_ordered(_featurize_one, jobs, settings.jobs))
    logger.info("Featurized %d tracks over %d clips", total, len(jobs))
    return total


def run_train(settings: Settings, balanced: bool = False) -> TrainingResult:
    """
    Train a classifier on the workdir's features and track labels.

    Args:
        settings: Resolved settings (classifier hyperparameters, seed)
        balanced: Train on all positive clips plus as many random negative clips

    Returns:
        TrainingResult: Per-epoch losses
    """
    dataset = DatasetRepository(settings.dataset_dir)
    workdir = Workdir(settings.workdir)
    track_labels = TrackRepository().read_track_labels(require_file(workdir.track_labels, "track"))
    clip_ids = selected_clip_ids(dataset, workdir)
    if balanced:
        clip_labels = dataset.read_labels().clips
        chosen = set(split_balanced({cid: clip_labels[cid] for cid in clip_ids if cid in clip_labels},
                                    settings.seed))
        clip_ids = [cid for cid in clip_ids if cid in chosen]

    features = FeatureRepository()
    series_list, labels = [], []
    for clip_id in clip_ids:
        for series in features.read_features(workdir.features(clip_id)):
            key = (clip_id, series.track_id)
            if key not in track_labels:
                raise DataValidationError(f"no label for track {clip_id}/{series.track_id}")
            series_list.append(series)
            labels.append(track_labels[key])

    cfg = settings.classifier
    norm = classifier_service.fit_normalization(series_list)
    dataset_tensors = [
        LabeledTensor(tensor=classifier_service.to_tensor(s, norm, cfg.seq_len), label=label)
        for s, label in zip(series_list, labels)
    ]
    logger.info("Training on %d tracks (%d startle)", len(labels), sum(labels))
    bundle = classifier_service.init_bundle(cfg, norm, settings.seed)
    trained, result = classifier_service.train(bundle, dataset_tensors)
    ModelRepository().save(workdir.model, trained)
    ReportRepository().write_loss_curve(workdir.loss_curve, result)
    return result


def run_classify(
    settings: Settings,
    threshold: Optional[float] = None,
    model_path: Optional[Path] = None,
) -> List[TrackScore]:
    """
    Score every featurized track and write track and clip scores.

    Args:
        settings: Resolved settings
        threshold: Decision threshold; defaults to the model's own
        model_path: Model to apply; defaults to the workdir's ``model.bin``

    Returns:
        List[TrackScore]: Scores in clip then track order
    """
    dataset = DatasetRepository(settings.dataset_dir)
    workdir = Workdir(settings.workdir)
    bundle = ModelRepository().load(Path(model_path) if model_path else workdir.model)
    service = classifier_service.ClassifierService(bundle, threshold)

    clip_ids = selected_clip_ids(dataset, workdir)
    scores: List[TrackScore] = []
    summaries: Dict[Tuple[str, int], TrackSummary] = {}
    for clip_id in clip_ids:
        series_list = FeatureRepository().read_features(workdir.features(clip_id))
        tracks = {t.track_id: t for t in TrackRepository().read_tracks(workdir.tracks(clip_id))}
        for series, confidence in zip(series_list, service.score(series_list)):
            scores.append(TrackScore(clip_id=clip_id, track_id=series.track_id, score=confidence))
            summaries[(clip_id, series.track_id)] = describe_track(tracks[series.track_id], series)

    reports = ReportRepository()
    reports.write_track_scores(workdir.track_scores, scores, summaries, service.label)
    clip_best = evaluation_service.max_track_scores(scores, dataset.list_clip_ids())
    reports.write_clip_scores(workdir.clip_scores, clip_best, service.label)
    flagged = sum(1 for score in clip_best.values() if service.label(score) is TrackLabel.STARTLE)
    logger.info("Classified %d tracks; %d of %d clips flagged", len(scores), flagged, len(clip_best))
    return scores


def run_eval(settings: Settings) -> EvalReport:
    """
    Evaluate the classify outputs against the dataset's labels.

    Every labeled clip is evaluated; clips discarded by the gate or left
    without tracks score 0.
    """
    dataset = DatasetRepository(settings.dataset_dir)
    workdir = Workdir(settings.workdir)
    reports = ReportRepository()
    track_labels = TrackRepository().read_track_labels(require_file(workdir.track_labels, "track"))
    scores = []
    for score in reports.read_track_scores(workdir.track_scores):
        key = (score.clip_id, score.track_id)
        if key not in track_labels:
            raise DataValidationError(f"no label for track {score.item_id}")
        scores.append(score.model_copy(update={"label": track_labels[key]}))
    clip_labels = [
        ClipLabel(clip_id=clip_id, label=label)
        for clip_id, label in sorted(dataset.read_labels().clips.items())
    ]

    report = evaluation_service.evaluate(scores, clip_labels, settings.evaluation)
    reports.write_report(workdir.report, report)
    reports.write_items(workdir.items, report)
    if settings.evaluation.pr_curve:
        reports.write_curve(workdir.pr_curve("track"),
                            evaluation_service.precision_recall_curve(report.track_items))
        reports.write_curve(workdir.pr_curve("clip"),
                            evaluation_service.precision_recall_curve(report.clip_items))
    return report
