"""
ModelBundle binary codec.

Layout (little-endian):

    8 bytes   magic ``STARTLM1``
    uint32    format_version
    repeated  uint64 element count + float64 values, in this order:
              conv1 W, conv1 b, conv2 W, conv2 b,
              LSTM W_ih, LSTM W_hh, LSTM b,
              dense W, dense b,
              normalization lo (4), normalization hi (4),
              decision threshold (1)
    uint64    byte length + UTF-8 JSON hyperparameter record (sorted keys)

Array shapes are recovered from the hyperparameter record. LSTM gate rows
are ordered input, forget, candidate, output.
"""
import io
import json
import struct
from pathlib import Path
from typing import List

import numpy as np
import torch
from pydantic import ValidationError

from startle.core.exceptions import ArtifactIOError, DataValidationError
from startle.core.file_handler import atomic_write_bytes, require_file
from startle.models.network import MODEL_FORMAT_VERSION, ModelBundle, StartleNet
from startle.schemas.classifier import NormalizationCoefficients
from startle.schemas.config import ClassifierConfig


MAGIC = b"STARTLM1"


class ModelRepository:
    """Repository for serialized model bundles."""

    def to_bytes(self, bundle: ModelBundle) -> bytes:
        """
        Encode a bundle.

        Args:
            bundle: Model to encode

        Returns:
            bytes: Encoded bundle
        """
        net = bundle.network
        with torch.no_grad():
            arrays = [
                net.conv1.weight, net.conv1.bias,
                net.conv2.weight, net.conv2.bias,
                net.lstm.weight_ih_l0, net.lstm.weight_hh_l0,
                net.lstm.bias_ih_l0 + net.lstm.bias_hh_l0,
                net.dense.weight, net.dense.bias,
            ]
            arrays = [a.detach().cpu().numpy() for a in arrays]
        arrays += [
            bundle.normalization.lo,
            bundle.normalization.hi,
            np.array([bundle.decision_threshold]),
        ]

        out = io.BytesIO()
        out.write(MAGIC)
        out.write(struct.pack("<I", bundle.format_version))
        for array in arrays:
            flat = np.ascontiguousarray(array, dtype="<f8").ravel()
            out.write(struct.pack("<Q", flat.size))
            out.write(flat.tobytes())
        record = json.dumps(
            {"seed": bundle.seed, **bundle.hyperparameters.model_dump()}, sort_keys=True
        ).encode("utf-8")
        out.write(struct.pack("<Q", len(record)))
        out.write(record)
        return out.getvalue()

    def from_bytes(self, data: bytes) -> ModelBundle:
        """
        Decode a bundle.

        Args:
            data: Encoded bundle

        Returns:
            ModelBundle: Decoded model

        Raises:
            DataValidationError: If the data is not a valid bundle
        """
        stream = io.BytesIO(data)
        if stream.read(len(MAGIC)) != MAGIC:
            raise DataValidationError("not a model bundle (bad magic)")
        (version,) = _unpack(stream, "<I")
        if version != MODEL_FORMAT_VERSION:
            raise DataValidationError(f"unsupported model format version {version}")

        arrays: List[np.ndarray] = []
        for _ in range(12):
            (count,) = _unpack(stream, "<Q")
            raw = stream.read(8 * count)
            if len(raw) != 8 * count:
                raise DataValidationError("truncated model bundle")
            arrays.append(np.frombuffer(raw, dtype="<f8").astype(np.float64))
        (length,) = _unpack(stream, "<Q")
        raw = stream.read(length)
        if len(raw) != length:
            raise DataValidationError("truncated hyperparameter record")

        try:
            record = json.loads(raw.decode("utf-8"))
            seed = int(record.pop("seed", 0))
            hyperparameters = ClassifierConfig.model_validate(record)
            network = StartleNet.from_config(hyperparameters)
            self._load_weights(network, arrays[:9])
            normalization = NormalizationCoefficients(lo=arrays[9], hi=arrays[10])
            return ModelBundle(
                network=network,
                normalization=normalization,
                decision_threshold=float(arrays[11][0]),
                hyperparameters=hyperparameters,
                seed=seed,
                format_version=version,
            )
        except (ValueError, ValidationError) as exc:
            raise DataValidationError(f"invalid model bundle: {exc}") from exc

    @staticmethod
    def _load_weights(network: StartleNet, arrays: List[np.ndarray]) -> None:
        targets = [
            network.conv1.weight, network.conv1.bias,
            network.conv2.weight, network.conv2.bias,
            network.lstm.weight_ih_l0, network.lstm.weight_hh_l0,
            network.lstm.bias_ih_l0,
            network.dense.weight, network.dense.bias,
        ]
        with torch.no_grad():
            for target, array in zip(targets, arrays):
                if array.size != target.numel():
                    raise ValueError(
                        f"weight size {array.size} does not match shape {tuple(target.shape)}"
                    )
                target.copy_(torch.from_numpy(array.reshape(tuple(target.shape))))
            network.lstm.bias_hh_l0.zero_()

    def save(self, path: Path, bundle: ModelBundle) -> None:
        """Write a bundle atomically."""
        atomic_write_bytes(Path(path), self.to_bytes(bundle))

    def load(self, path: Path) -> ModelBundle:
        """
        Read a bundle.

        Raises:
            MissingArtifactError: If the file is absent
        """
        require_file(Path(path), "train")
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            raise ArtifactIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
        return self.from_bytes(data)


def _unpack(stream: io.BytesIO, fmt: str) -> tuple:
    size = struct.calcsize(fmt)
    raw = stream.read(size)
    if len(raw) != size:
        raise DataValidationError("truncated model bundle")
    return struct.unpack(fmt, raw)
