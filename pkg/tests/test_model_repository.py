import struct

import numpy as np
import pytest
import torch

from startle.core.exceptions import DataValidationError, MissingArtifactError
from startle.repositories.model_repository import MAGIC, ModelRepository
from startle.schemas.classifier import NormalizationCoefficients, TrackTensor
from startle.schemas.config import ClassifierConfig
from startle.services.classifier_service import init_bundle, predict


def _bundle(cfg: ClassifierConfig, seed: int = 3):
    norm = NormalizationCoefficients(lo=np.array([0.0, -np.pi, 0.2, 0.0]),
                                     hi=np.array([90.0, np.pi, 4.0, 0.3]))
    return init_bundle(cfg, norm, seed=seed)


def test_bundle_round_trip_predicts_identically(tmp_path, tiny_classifier: ClassifierConfig) -> None:
    bundle = _bundle(tiny_classifier)
    path = tmp_path / "model.bin"
    rng = np.random.default_rng(0)
    tensors = [TrackTensor(values=rng.uniform(-1, 1, (8, 4)), valid_len=8) for _ in range(6)]

    ModelRepository().save(path, bundle)
    loaded = ModelRepository().load(path)

    assert predict(loaded, tensors) == predict(bundle, tensors)
    assert loaded.hyperparameters == bundle.hyperparameters
    assert loaded.seed == bundle.seed
    assert loaded.decision_threshold == bundle.decision_threshold
    np.testing.assert_array_equal(loaded.normalization.hi, bundle.normalization.hi)
    assert not loaded.network.lstm.bias_hh_l0.requires_grad


def test_encoding_is_stable(tiny_classifier: ClassifierConfig) -> None:
    repository = ModelRepository()
    data = repository.to_bytes(_bundle(tiny_classifier))

    assert data.startswith(MAGIC)
    assert repository.to_bytes(repository.from_bytes(data)) == data


def test_recurrent_biases_are_folded(tiny_classifier: ClassifierConfig) -> None:
    bundle = _bundle(tiny_classifier)
    with torch.no_grad():
        bundle.network.lstm.bias_hh_l0.fill_(0.25)
    expected = (bundle.network.lstm.bias_ih_l0 + 0.25).clone()

    loaded = ModelRepository().from_bytes(ModelRepository().to_bytes(bundle))

    assert torch.allclose(loaded.network.lstm.bias_ih_l0, expected)
    assert not loaded.network.lstm.bias_hh_l0.any()


def test_bad_magic_is_rejected(tiny_classifier: ClassifierConfig) -> None:
    data = ModelRepository().to_bytes(_bundle(tiny_classifier))
    with pytest.raises(DataValidationError, match="magic"):
        ModelRepository().from_bytes(b"NOTAMODL" + data[8:])


def test_unknown_version_is_rejected(tiny_classifier: ClassifierConfig) -> None:
    data = ModelRepository().to_bytes(_bundle(tiny_classifier))
    with pytest.raises(DataValidationError, match="version 7"):
        ModelRepository().from_bytes(MAGIC + struct.pack("<I", 7) + data[12:])


@pytest.mark.parametrize("cut", [4, 10, 40, -3])
def test_truncated_bundle_is_rejected(cut: int, tiny_classifier: ClassifierConfig) -> None:
    data = ModelRepository().to_bytes(_bundle(tiny_classifier))
    with pytest.raises(DataValidationError):
        ModelRepository().from_bytes(data[:cut])


def test_missing_model_names_the_train_stage(tmp_path) -> None:
    with pytest.raises(MissingArtifactError, match="train"):
        ModelRepository().load(tmp_path / "model.bin")
