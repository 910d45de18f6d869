"""
Sequence classifier network and its serialized bundle.
"""
import math
from typing import Dict

import torch
import torch.nn.functional as F
from pydantic import BaseModel, ConfigDict, Field
from torch import nn

from startle.schemas.classifier import NormalizationCoefficients
from startle.schemas.config import FEATURE_COUNT, ClassifierConfig


MODEL_FORMAT_VERSION = 1


class StartleNet(nn.Module):
    """
    conv1 -> ReLU -> conv2 -> ReLU -> LSTM -> dense, over (batch, time, feature) input.

    Convolutions run along time with kernel size 3 and same-length zero
    padding. The LSTM carries a single bias vector (``bias_ih_l0``);
    ``bias_hh_l0`` is held at zero and excluded from training. Gate rows
    are ordered input, forget, candidate, output.
    """

    def __init__(
        self,
        conv1_channels: int = 16,
        conv2_channels: int = 32,
        hidden_size: int = 64,
        in_features: int = FEATURE_COUNT,
    ):
        super().__init__()
        self.conv1 = nn.Conv1d(in_features, conv1_channels, kernel_size=3, padding=1)
        self.conv2 = nn.Conv1d(conv1_channels, conv2_channels, kernel_size=3, padding=1)
        self.lstm = nn.LSTM(conv2_channels, hidden_size, batch_first=True)
        self.dense = nn.Linear(hidden_size, 1)
        self.double()
        with torch.no_grad():
            self.lstm.bias_hh_l0.zero_()
        self.lstm.bias_hh_l0.requires_grad_(False)

    @classmethod
    def from_config(cls, cfg: ClassifierConfig) -> "StartleNet":
        return cls(cfg.conv1_channels, cfg.conv2_channels, cfg.hidden_size)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """
        Args:
            x: (batch, L, 4) float64 tensor

        Returns:
            torch.Tensor: (batch,) logits
        """
        z = x.transpose(1, 2)
        z = F.relu(self.conv1(z))
        z = F.relu(self.conv2(z))
        _, (hidden, _) = self.lstm(z.transpose(1, 2))
        return self.dense(hidden[-1]).squeeze(-1)

    def confidence(self, x: torch.Tensor) -> torch.Tensor:
        """Startle confidence in [0, 1] per batch row."""
        return torch.sigmoid(self.forward(x))

    def reset_parameters(self, seed: int) -> None:
        """
        Draw every trainable weight uniformly in +-1/sqrt(fan_in).

        Args:
            seed: Generator seed
        """
        generator = torch.Generator().manual_seed(seed)
        fan_in = self.fan_in()
        with torch.no_grad():
            for name, param in self.named_parameters():
                if not param.requires_grad:
                    continue
                bound = 1.0 / math.sqrt(fan_in[name])
                param.uniform_(-bound, bound, generator=generator)

    def fan_in(self) -> Dict[str, int]:
        """Fan-in of each named parameter."""
        kernel = self.conv1.kernel_size[0]
        return {
            "conv1.weight": self.conv1.in_channels * kernel,
            "conv1.bias": self.conv1.in_channels * kernel,
            "conv2.weight": self.conv2.in_channels * kernel,
            "conv2.bias": self.conv2.in_channels * kernel,
            "lstm.weight_ih_l0": self.lstm.input_size,
            "lstm.weight_hh_l0": self.lstm.hidden_size,
            "lstm.bias_ih_l0": self.lstm.hidden_size,
            "lstm.bias_hh_l0": self.lstm.hidden_size,
            "dense.weight": self.dense.in_features,
            "dense.bias": self.dense.in_features,
        }


class ModelBundle(BaseModel):
    """
    Network weights together with everything needed to apply them.

    Attributes:
        network: Trained (or initialized) network
        normalization: Feature normalization fitted on the training set
        decision_threshold: Confidence at or above which a track is a startle
        hyperparameters: Architecture and training settings
        seed: Seed used for initialization and shuffling
        format_version: Binary format version
    """

    network: StartleNet
    normalization: NormalizationCoefficients
    decision_threshold: float = Field(default=0.5, gt=0, lt=1)
    hyperparameters: ClassifierConfig = Field(default_factory=ClassifierConfig)
    seed: int = 0
    format_version: int = MODEL_FORMAT_VERSION

    model_config = ConfigDict(arbitrary_types_allowed=True)
