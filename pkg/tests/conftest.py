import os

import pytest

from startle.schemas.config import ClassifierConfig


@pytest.fixture(autouse=True)
def _clean_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    for key in list(os.environ):
        if key.upper().startswith("STARTLE_"):
            monkeypatch.delenv(key)


@pytest.fixture
def tiny_classifier() -> ClassifierConfig:
    """Reduced network used where the full-size one would only slow tests down."""
    return ClassifierConfig(seq_len=8, conv1_channels=3, conv2_channels=4, hidden_size=5,
                            epochs=5, batch_size=4)
