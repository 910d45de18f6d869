import math

import numpy as np
import pytest
import torch

from startle.core.exceptions import DataValidationError
from startle.models.network import StartleNet
from startle.schemas.classifier import LabeledTensor, NormalizationCoefficients, TrackTensor
from startle.schemas.common import TrackLabel
from startle.schemas.config import ClassifierConfig
from startle.schemas.features import FeatureSeries
from startle.services.classifier_service import (
    ClassifierService,
    batch_loss,
    classify_track,
    fit_normalization,
    forward,
    init_bundle,
    loss_bce,
    predict,
    to_tensor,
    train,
)


def _series(values, track_id: int = 0) -> FeatureSeries:
    values = np.asarray(values, dtype=np.float64)
    return FeatureSeries(track_id=track_id, frame_indices=np.arange(len(values)), values=values)


def _random_series(n_rows: int, seed: int = 0) -> FeatureSeries:
    rng = np.random.default_rng(seed)
    values = np.column_stack([
        rng.uniform(0, 80, n_rows),
        rng.uniform(-math.pi, math.pi, n_rows),
        rng.uniform(0.5, 3.0, n_rows),
        rng.uniform(0, 0.2, n_rows),
    ])
    return _series(values)


def _unit_norm() -> NormalizationCoefficients:
    return NormalizationCoefficients(lo=np.full(4, -1.0), hi=np.full(4, 1.0))


def _separable(n_per_class: int, length: int, seed: int = 0):
    """Non-startle rows are flat; startle rows carry a speed burst with an aspect drop."""
    rng = np.random.default_rng(seed)
    examples = []
    for label in (0, 1):
        for _ in range(n_per_class):
            values = np.column_stack([
                -0.6 + 0.05 * rng.normal(size=length),
                rng.uniform(-1, 1, length),
                0.4 + 0.05 * rng.normal(size=length),
                np.full(length, -1.0),
            ])
            if label:
                onset = int(rng.integers(1, length // 2))
                values[onset:onset + length // 4, 0] = 0.8
                values[onset:onset + length // 4, 2] = -0.4
            examples.append(
                LabeledTensor(tensor=TrackTensor(values=np.clip(values, -1, 1), valid_len=length),
                              label=label)
            )
    return examples


def _zero_weights(network: StartleNet) -> None:
    with torch.no_grad():
        for param in network.parameters():
            param.zero_()


def test_normalization_spans_training_range() -> None:
    norm = fit_normalization([_series([[0, 1, 2, 0], [50, -1, 2, 0.5]])])

    assert norm.lo[0] == 0 and norm.hi[0] == 50
    assert norm.hi[2] == 3.0  # constant column widened to lo + 1
    scaled = norm.apply(np.array([[50, 0, 2, 0], [75, 0, 2, 0]], dtype=float))
    assert scaled[0, 0] == 1.0
    assert scaled[1, 0] == 1.0


def test_normalization_needs_rows() -> None:
    with pytest.raises(DataValidationError):
        fit_normalization([])
    with pytest.raises(DataValidationError):
        fit_normalization([_series(np.zeros((0, 4)))])


def test_training_values_map_into_unit_range() -> None:
    series = [_random_series(30, seed) for seed in range(5)]
    norm = fit_normalization(series)
    for s in series:
        tensor = to_tensor(s, norm, 40)
        assert np.all(np.abs(tensor.values) <= 1.0)
        assert np.all(np.isfinite(tensor.values))


def test_short_series_is_end_padded() -> None:
    tensor = to_tensor(_random_series(25), fit_normalization([_random_series(25)]), 40)

    assert tensor.values.shape == (40, 4)
    assert tensor.valid_len == 25
    assert not tensor.values[25:].any()


def test_long_series_is_truncated() -> None:
    series = _random_series(55)
    norm = fit_normalization([series])

    tensor = to_tensor(series, norm, 40)

    assert tensor.valid_len == 40
    np.testing.assert_array_equal(tensor.values, norm.apply(series.values[:40]))


def test_exact_length_series_has_no_padding() -> None:
    tensor = to_tensor(_random_series(40), fit_normalization([_random_series(40)]), 40)
    assert tensor.valid_len == 40


def test_zero_weights_give_even_odds(tiny_classifier: ClassifierConfig) -> None:
    bundle = init_bundle(tiny_classifier, _unit_norm())
    _zero_weights(bundle.network)
    tensor = TrackTensor(values=np.full((8, 4), 0.3), valid_len=8)

    assert forward(bundle, tensor) == 0.5


def test_forward_is_deterministic_across_instances(tiny_classifier: ClassifierConfig) -> None:
    tensor = to_tensor(_random_series(8), fit_normalization([_random_series(8)]), 8)
    first = init_bundle(tiny_classifier, _unit_norm(), seed=4)
    second = init_bundle(tiny_classifier, _unit_norm(), seed=4)

    assert forward(first, tensor) == forward(second, tensor)
    assert forward(first, tensor) == forward(first, tensor)


def test_confidence_stays_in_unit_interval(tiny_classifier: ClassifierConfig) -> None:
    rng = np.random.default_rng(0)
    for seed in range(250):
        bundle = init_bundle(tiny_classifier, _unit_norm(), seed=seed)
        tensors = [TrackTensor(values=rng.uniform(-1, 1, (8, 4)), valid_len=8) for _ in range(4)]
        for confidence in predict(bundle, tensors):
            assert 0.0 <= confidence <= 1.0


def test_tensor_length_must_match_model(tiny_classifier: ClassifierConfig) -> None:
    bundle = init_bundle(tiny_classifier, _unit_norm())
    with pytest.raises(DataValidationError):
        forward(bundle, TrackTensor(values=np.zeros((40, 4)), valid_len=0))


@pytest.mark.parametrize(
    "confidence,label,expected",
    [(0.5, 1, math.log(2)), (1 - 1e-7, 1, 0.0), (0.9, 0, -math.log(0.1)), (0.0, 1, -math.log(1e-7))],
)
def test_bce_examples(confidence: float, label: int, expected: float) -> None:
    assert loss_bce(confidence, label) == pytest.approx(expected, abs=1e-6)


def _min_preactivation(network: StartleNet, inputs: torch.Tensor) -> float:
    with torch.no_grad():
        z1 = network.conv1(inputs.transpose(1, 2))
        z2 = network.conv2(torch.relu(z1))
    return min(z1.abs().min().item(), z2.abs().min().item())


def test_gradients_match_central_differences() -> None:
    h = 1e-5
    labels = torch.tensor([0.0, 1.0, 0.0, 1.0], dtype=torch.float64)
    checked = 0
    for seed in range(20):
        network = StartleNet(conv1_channels=3, conv2_channels=4, hidden_size=5)
        network.reset_parameters(seed)
        rng = np.random.default_rng(seed)
        inputs = torch.from_numpy(rng.uniform(-1, 1, (4, 8, 4)))
        # differences straddling a ReLU kink are not comparable
        if _min_preactivation(network, inputs) < 1e-4:
            continue
        checked += 1

        network.zero_grad()
        batch_loss(network, inputs, labels).backward()

        for name, param in network.named_parameters():
            if not param.requires_grad:
                continue
            analytic = param.grad.detach().clone().view(-1)
            numeric = torch.zeros_like(analytic)
            flat = param.data.view(-1)
            with torch.no_grad():
                for i in range(flat.numel()):
                    original = flat[i].item()
                    flat[i] = original + h
                    plus = batch_loss(network, inputs, labels).item()
                    flat[i] = original - h
                    minus = batch_loss(network, inputs, labels).item()
                    flat[i] = original
                    numeric[i] = (plus - minus) / (2 * h)
            bound = 1e-4 * torch.maximum(analytic.abs(), numeric.abs()) + 1e-8
            assert torch.all((analytic - numeric).abs() <= bound), f"{name} (seed {seed})"
    assert checked >= 15


def test_recurrent_bias_is_frozen_at_zero(tiny_classifier: ClassifierConfig) -> None:
    bundle = init_bundle(tiny_classifier, _unit_norm(), seed=1)
    trained, _ = train(bundle, _separable(4, 8), epochs=3)

    assert not trained.network.lstm.bias_hh_l0.requires_grad
    assert not trained.network.lstm.bias_hh_l0.any()


def test_zero_epochs_returns_identical_copy(tiny_classifier: ClassifierConfig) -> None:
    bundle = init_bundle(tiny_classifier, _unit_norm(), seed=2)

    trained, result = train(bundle, _separable(3, 8), epochs=0)

    assert trained.network is not bundle.network
    assert result.train_loss == []
    for a, b in zip(trained.network.state_dict().values(), bundle.network.state_dict().values()):
        assert torch.equal(a, b)


def test_training_leaves_input_bundle_untouched(tiny_classifier: ClassifierConfig) -> None:
    bundle = init_bundle(tiny_classifier, _unit_norm(), seed=2)
    before = {k: v.clone() for k, v in bundle.network.state_dict().items()}

    train(bundle, _separable(3, 8), epochs=3)

    for key, value in bundle.network.state_dict().items():
        assert torch.equal(value, before[key])


def test_training_is_reproducible(tiny_classifier: ClassifierConfig) -> None:
    data = _separable(6, 8, seed=3)
    first, first_result = train(init_bundle(tiny_classifier, _unit_norm(), seed=7), data)
    second, second_result = train(init_bundle(tiny_classifier, _unit_norm(), seed=7), data)

    assert first_result.train_loss == second_result.train_loss
    for a, b in zip(first.network.state_dict().values(), second.network.state_dict().values()):
        assert torch.equal(a, b)


def test_single_class_training_set_is_rejected(tiny_classifier: ClassifierConfig) -> None:
    data = [example for example in _separable(3, 8) if example.label == 1]
    with pytest.raises(DataValidationError, match="both"):
        train(init_bundle(tiny_classifier, _unit_norm()), data)


def test_validation_hold_out_selects_best_epoch(tiny_classifier: ClassifierConfig) -> None:
    cfg = tiny_classifier.model_copy(update={"val_fraction": 0.25, "epochs": 12})
    bundle = init_bundle(cfg, _unit_norm(), seed=5)

    trained, result = train(bundle, _separable(8, 8, seed=1))

    assert len(result.val_loss) == len(result.train_loss) == 12
    assert result.best_epoch == int(np.argmin(result.val_loss)) + 1


def test_training_reduces_loss_on_separable_set() -> None:
    cfg = ClassifierConfig(seq_len=16, conv1_channels=4, conv2_channels=8, hidden_size=8,
                           epochs=60, batch_size=8, learning_rate=1e-2)
    data = _separable(12, 16, seed=2)

    trained, result = train(init_bundle(cfg, _unit_norm(), seed=0), data)

    assert result.train_loss[-1] < result.train_loss[0]
    confidences = predict(trained, [example.tensor for example in data])
    positives = [c for c, e in zip(confidences, data) if e.label]
    negatives = [c for c, e in zip(confidences, data) if not e.label]
    assert np.mean(positives) > np.mean(negatives)


@pytest.mark.slow
def test_full_network_fits_separable_set() -> None:
    cfg = ClassifierConfig(batch_size=64, learning_rate=1e-2)
    data = _separable(32, 40, seed=4)

    _, result = train(init_bundle(cfg, _unit_norm(), seed=0), data)

    assert len(result.train_loss) == 200
    assert result.train_loss[-1] < 0.1
    tail = result.train_loss[-10:]
    assert all(later <= earlier + 1e-9 for earlier, later in zip(tail, tail[1:]))


def test_threshold_is_inclusive(tiny_classifier: ClassifierConfig) -> None:
    bundle = init_bundle(tiny_classifier, _unit_norm())
    _zero_weights(bundle.network)
    series = _series(np.full((8, 4), 0.5))

    at_default = classify_track(bundle, series)
    strict = classify_track(bundle, series, threshold=0.9)

    assert at_default.confidence == 0.5
    assert at_default.label is TrackLabel.STARTLE
    assert strict.label is TrackLabel.NON_STARTLE


def test_raising_threshold_never_creates_startles(tiny_classifier: ClassifierConfig) -> None:
    bundle = init_bundle(tiny_classifier, _unit_norm())
    confidences = np.linspace(0, 1, 101)
    thresholds = np.linspace(0.05, 0.95, 19)
    for low, high in zip(thresholds[:-1], thresholds[1:]):
        low_service = ClassifierService(bundle, float(low))
        high_service = ClassifierService(bundle, float(high))
        for c in confidences:
            if high_service.label(c) is TrackLabel.STARTLE:
                assert low_service.label(c) is TrackLabel.STARTLE
