"""
Classifier service: tensor assembly, training and inference.
"""
import copy
import logging
import math
from contextlib import contextmanager
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from startle.core.exceptions import DataValidationError
from startle.models.network import ModelBundle, StartleNet
from startle.schemas.classifier import (
    Classification,
    LabeledTensor,
    NormalizationCoefficients,
    TrackTensor,
    TrainingResult,
)
from startle.schemas.common import TrackLabel
from startle.schemas.config import FEATURE_COUNT, DEFAULT_CLIP_LEN, ClassifierConfig
from startle.schemas.features import FeatureSeries


logger = logging.getLogger(__name__)

BCE_EPSILON = 1e-7


def fit_normalization(series_list: Sequence[FeatureSeries]) -> NormalizationCoefficients:
    """
    Fit per-feature min/max over every row of the training series.

    Args:
        series_list: Training feature series

    Returns:
        NormalizationCoefficients: Column-wise bounds; a constant column gets hi = lo + 1

    Raises:
        DataValidationError: If there are no rows at all
    """
    rows = [series.values for series in series_list if len(series)]
    if not rows:
        raise DataValidationError("cannot fit normalization on an empty training set")
    stacked = np.concatenate(rows, axis=0)
    lo = stacked.min(axis=0)
    hi = stacked.max(axis=0)
    hi = np.where(hi > lo, hi, lo + 1.0)
    return NormalizationCoefficients(lo=lo, hi=hi)


def to_tensor(
    series: FeatureSeries,
    norm: NormalizationCoefficients,
    length: int = DEFAULT_CLIP_LEN,
) -> TrackTensor:
    """
    Normalize a series into a fixed (length, 4) tensor.

    Shorter series are end-padded with zero rows, longer ones truncated.

    Args:
        series: Non-empty feature series
        norm: Normalization fitted on the training set
        length: Tensor length

    Returns:
        TrackTensor: Normalized tensor

    Raises:
        DataValidationError: If the series is empty
    """
    if len(series) == 0:
        raise DataValidationError(f"track {series.track_id} has no feature rows")
    valid = min(len(series), length)
    values = np.zeros((length, FEATURE_COUNT), dtype=np.float64)
    values[:valid] = norm.apply(series.values[:valid])
    return TrackTensor(values=values, valid_len=valid)


def _stack(tensors: Sequence[TrackTensor], length: int) -> torch.Tensor:
    for tensor in tensors:
        if tensor.values.shape != (length, FEATURE_COUNT):
            raise DataValidationError(
                f"tensor shape {tensor.values.shape} does not match model input ({length}, {FEATURE_COUNT})"
            )
    return torch.from_numpy(np.stack([tensor.values for tensor in tensors]))


def init_bundle(
    cfg: ClassifierConfig,
    normalization: NormalizationCoefficients,
    seed: int = 0,
) -> ModelBundle:
    """
    Create a freshly initialized model bundle.

    Args:
        cfg: Architecture and training settings
        normalization: Feature normalization
        seed: Initialization seed

    Returns:
        ModelBundle: Untrained bundle
    """
    network = StartleNet.from_config(cfg)
    network.reset_parameters(seed)
    return ModelBundle(
        network=network,
        normalization=normalization,
        decision_threshold=cfg.decision_threshold,
        hyperparameters=cfg,
        seed=seed,
    )


def forward(bundle: ModelBundle, tensor: TrackTensor) -> float:
    """Startle confidence of a single tensor."""
    return predict(bundle, [tensor])[0]


def predict(bundle: ModelBundle, tensors: Sequence[TrackTensor]) -> List[float]:
    """
    Startle confidences of a batch of tensors.

    Args:
        bundle: Model to apply
        tensors: Inputs of the model's sequence length

    Returns:
        List[float]: One confidence in [0, 1] per tensor

    Raises:
        DataValidationError: On a tensor shape mismatch
    """
    if not tensors:
        return []
    inputs = _stack(tensors, bundle.hyperparameters.seq_len)
    network = bundle.network
    network.eval()
    with torch.no_grad():
        confidences = network.confidence(inputs)
    return [float(c) for c in confidences]


def loss_bce(confidence: float, label: int) -> float:
    """
    Binary cross entropy of one prediction.

    The confidence is clamped to [1e-7, 1 - 1e-7].
    """
    p = min(max(float(confidence), BCE_EPSILON), 1.0 - BCE_EPSILON)
    return -(label * math.log(p) + (1 - label) * math.log(1.0 - p))


def batch_loss(network: StartleNet, inputs: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """
    Mean BCE of a batch, computed from logits.

    Args:
        network: Network to evaluate
        inputs: (batch, L, 4) float64 inputs
        labels: (batch,) float64 0/1 labels

    Returns:
        torch.Tensor: Scalar loss
    """
    return F.binary_cross_entropy_with_logits(network(inputs), labels)


@contextmanager
def single_thread() -> Iterator[None]:
    previous = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        yield
    finally:
        torch.set_num_threads(previous)


def _split_validation(
    labels: np.ndarray, fraction: float, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """Stratified, seeded train/validation index split."""
    rng = np.random.default_rng(seed)
    train_idx, val_idx = [], []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(len(members))]
        n_val = int(round(fraction * len(members)))
        # each class keeps at least one training example
        n_val = min(n_val, len(members) - 1)
        val_idx.append(members[:n_val])
        train_idx.append(members[n_val:])
    return np.sort(np.concatenate(train_idx)), np.sort(np.concatenate(val_idx))


def train(
    bundle: ModelBundle,
    dataset: Sequence[LabeledTensor],
    epochs: Optional[int] = None,
    batch_size: Optional[int] = None,
    learning_rate: Optional[float] = None,
    seed: Optional[int] = None,
) -> Tuple[ModelBundle, TrainingResult]:
    """
    Train a bundle's network with Adam on mean BCE.

    The input bundle is never modified. Arguments left as None fall back to
    the bundle's hyperparameters and seed. When ``val_fraction`` > 0 a
    stratified hold-out is scored after every epoch and the weights of the
    epoch with the lowest validation BCE are returned.

    Args:
        bundle: Initialized or previously trained bundle
        dataset: Labeled training tensors
        epochs: Passes over the training set
        batch_size: Mini-batch size
        learning_rate: Adam step size
        seed: Shuffling seed

    Returns:
        Tuple[ModelBundle, TrainingResult]: Trained copy and per-epoch losses

    Raises:
        DataValidationError: If the dataset does not contain both classes
    """
    hp = bundle.hyperparameters
    epochs = hp.epochs if epochs is None else epochs
    batch_size = hp.batch_size if batch_size is None else batch_size
    learning_rate = hp.learning_rate if learning_rate is None else learning_rate
    seed = bundle.seed if seed is None else seed

    labels = np.array([example.label for example in dataset], dtype=np.int64)
    if len(set(labels.tolist())) < 2:
        raise DataValidationError("training set must contain both startle and non-startle tracks")

    trained = bundle.model_copy(
        update={
            "network": copy.deepcopy(bundle.network),
            "hyperparameters": hp.model_copy(
                update={"epochs": epochs, "batch_size": batch_size, "learning_rate": learning_rate}
            ),
            "seed": seed,
        }
    )
    result = TrainingResult()
    if epochs == 0:
        return trained, result

    inputs = _stack([example.tensor for example in dataset], hp.seq_len)
    targets = torch.from_numpy(labels.astype(np.float64))
    train_idx, val_idx = _split_validation(labels, hp.val_fraction, seed)
    if hp.val_fraction > 0 and len(val_idx) == 0:
        logger.warning("Validation hold-out is empty; training on all %d examples", len(labels))
    train_inputs, train_targets = inputs[train_idx], targets[train_idx]
    val_inputs, val_targets = inputs[val_idx], targets[val_idx]

    network = trained.network
    optimizer = torch.optim.Adam(
        [p for p in network.parameters() if p.requires_grad],
        lr=learning_rate,
        betas=(hp.beta1, hp.beta2),
        eps=hp.adam_eps,
    )
    generator = torch.Generator().manual_seed(seed)
    best_state, best_val = None, math.inf

    with single_thread():
        for epoch in range(epochs):
            network.train()
            order = torch.randperm(len(train_idx), generator=generator)
            for start in range(0, len(order), batch_size):
                batch = order[start:start + batch_size]
                optimizer.zero_grad()
                loss = batch_loss(network, train_inputs[batch], train_targets[batch])
                loss.backward()
                optimizer.step()

            network.eval()
            with torch.no_grad():
                result.train_loss.append(float(batch_loss(network, train_inputs, train_targets)))
                if len(val_idx):
                    val_loss = float(batch_loss(network, val_inputs, val_targets))
                    result.val_loss.append(val_loss)
                    if val_loss < best_val:
                        best_val = val_loss
                        best_state = copy.deepcopy(network.state_dict())
                        result.best_epoch = epoch + 1

            if (epoch + 1) % 10 == 0 or epoch + 1 == epochs:
                logger.info("Epoch %d/%d train_bce=%.6f", epoch + 1, epochs, result.train_loss[-1])

    if best_state is not None:
        network.load_state_dict(best_state)
        logger.info("Restored epoch %d (val_bce=%.6f)", result.best_epoch, best_val)
    return trained, result


def classify_track(
    bundle: ModelBundle,
    series: FeatureSeries,
    norm: Optional[NormalizationCoefficients] = None,
    threshold: Optional[float] = None,
) -> Classification:
    """
    Label one track.

    Args:
        bundle: Trained model
        series: Track features
        norm: Normalization override (defaults to the bundle's)
        threshold: Decision threshold override (defaults to the bundle's)

    Returns:
        Classification: startle iff confidence >= threshold
    """
    norm = bundle.normalization if norm is None else norm
    threshold = bundle.decision_threshold if threshold is None else threshold
    confidence = forward(bundle, to_tensor(series, norm, bundle.hyperparameters.seq_len))
    return Classification(label=TrackLabel.from_flag(confidence >= threshold), confidence=confidence)


class ClassifierService:
    """Applies one trained bundle to many tracks."""

    def __init__(self, bundle: ModelBundle, threshold: Optional[float] = None):
        """
        Args:
            bundle: Trained model
            threshold: Decision threshold override
        """
        self.bundle = bundle
        self.threshold = bundle.decision_threshold if threshold is None else threshold

    def score(self, series_list: Sequence[FeatureSeries]) -> List[float]:
        """Confidences for a batch of feature series."""
        length = self.bundle.hyperparameters.seq_len
        tensors = [to_tensor(s, self.bundle.normalization, length) for s in series_list]
        return predict(self.bundle, tensors)

    def label(self, confidence: float) -> TrackLabel:
        return TrackLabel.from_flag(confidence >= self.threshold)
