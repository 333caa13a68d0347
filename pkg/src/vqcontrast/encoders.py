"""Modality encoders: an EEG convolutional front end and an image head.

Both encoders share a tail: squash features to rotation angles in
(-pi, pi), run the variational quantum layer, project to the shared
embedding dimension, and L2-normalize.  The EEG path prepends a spatial
convolution across electrodes and a temporal convolution along samples;
the image path starts from precomputed backbone embeddings, which are
input data and never trained.

Trainable values live in ``Tensor`` objects keyed by name; batch-norm
running statistics are plain arrays ("buffers") that persist with the
parameters but receive no gradients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diffnet
from .diffnet import Tape, Tensor
from .errors import ConfigurationError, ShapeError
from .statevector import MAX_QUBITS
from .vqc import QuantumLayerParams, vqc_batched_forward, vqc_batched_vjp


def quantum_layer(tape: Tape, x: Tensor, weights: Tensor) -> Tensor:
    """Tape op wrapping the batched quantum circuit.

    ``x`` holds per-row rotation angles (B, n_qubits); ``weights`` is the
    (n_layers, n_qubits) trainable angle grid.  Gradients for both come
    from the parameter-shift rule, so they are exact, not approximate.
    """
    if weights.data.ndim != 2:
        raise ShapeError(f"expected (n_layers, n_qubits) weights, got {weights.shape}")
    params = QuantumLayerParams(
        n_qubits=weights.shape[1], n_layers=weights.shape[0], weights=weights.data
    )
    out = Tensor(vqc_batched_forward(x.data, params))

    def backward():
        g = out.grad
        if g is None:
            return
        d_inputs, d_weights = vqc_batched_vjp(x.data, params, g)
        x.accumulate(d_inputs)
        weights.accumulate(d_weights)

    tape.record(backward)
    return out


def _check_positive(**fields):
    for name, value in fields.items():
        if int(value) != value or value < 1:
            raise ConfigurationError(f"{name} must be a positive integer, got {value}")


@dataclass(frozen=True)
class EegEncoderConfig:
    """Geometry of the EEG encoder."""

    electrodes: int
    time_samples: int
    spatial_maps: int
    temporal_maps: int
    temporal_kernel: int
    embed_dim: int
    n_qubits: int
    n_layers: int

    def __post_init__(self):
        _check_positive(
            electrodes=self.electrodes,
            time_samples=self.time_samples,
            spatial_maps=self.spatial_maps,
            temporal_maps=self.temporal_maps,
            temporal_kernel=self.temporal_kernel,
            embed_dim=self.embed_dim,
            n_qubits=self.n_qubits,
            n_layers=self.n_layers,
        )
        if self.temporal_kernel > self.time_samples:
            raise ConfigurationError(
                f"temporal kernel {self.temporal_kernel} exceeds "
                f"{self.time_samples} time samples"
            )
        if self.n_qubits > MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be <= {MAX_QUBITS}")

    @property
    def temporal_out(self) -> int:
        return self.time_samples - self.temporal_kernel + 1

    @property
    def flat_dim(self) -> int:
        return self.temporal_maps * self.temporal_out


@dataclass(frozen=True)
class ImageHeadConfig:
    """Geometry of the image embedding head."""

    input_dim: int
    embed_dim: int
    n_qubits: int
    n_layers: int

    def __post_init__(self):
        _check_positive(
            input_dim=self.input_dim,
            embed_dim=self.embed_dim,
            n_qubits=self.n_qubits,
            n_layers=self.n_layers,
        )
        if self.n_qubits > MAX_QUBITS:
            raise ConfigurationError(f"n_qubits must be <= {MAX_QUBITS}")


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


# The projections feeding the angle squash start damped so that initial
# rotation angles sit near zero: every sample then measures to nearly the
# same state, similarity logits start near-uniform, and the first-epoch
# loss lands at ~ln B despite the large initial temperature.
ANGLE_INIT_SCALE = 0.1


def init_circuit_weights(rng: np.random.Generator, n_layers: int, n_qubits: int):
    return rng.uniform(-np.pi, np.pi, size=(n_layers, n_qubits))


class EegConvEncoder:
    """Spatial conv -> BN -> ELU -> temporal conv -> BN -> ELU -> flatten
    -> linear -> angle squash -> quantum layer -> linear -> L2 norm."""

    def __init__(self, config: EegEncoderConfig, rng: np.random.Generator):
        self.config = config
        c = config
        self.params: dict[str, Tensor] = {
            "spatial_kernel": Tensor(
                _glorot(rng, (c.spatial_maps, 1, c.electrodes, 1),
                        c.electrodes, c.spatial_maps)
            ),
            "bn1_gamma": Tensor(np.ones(c.spatial_maps)),
            "bn1_beta": Tensor(np.zeros(c.spatial_maps)),
            "temporal_kernel": Tensor(
                _glorot(rng, (c.temporal_maps, c.spatial_maps, 1, c.temporal_kernel),
                        c.spatial_maps * c.temporal_kernel,
                        c.temporal_maps * c.temporal_kernel)
            ),
            "bn2_gamma": Tensor(np.ones(c.temporal_maps)),
            "bn2_beta": Tensor(np.zeros(c.temporal_maps)),
            "angle_w": Tensor(ANGLE_INIT_SCALE * _glorot(rng, (c.flat_dim, c.n_qubits),
                                                         c.flat_dim, c.n_qubits)),
            "angle_b": Tensor(np.zeros(c.n_qubits)),
            "circuit_weights": Tensor(init_circuit_weights(rng, c.n_layers, c.n_qubits)),
            "proj_w": Tensor(_glorot(rng, (c.n_qubits, c.embed_dim),
                                     c.n_qubits, c.embed_dim)),
            "proj_b": Tensor(np.zeros(c.embed_dim)),
        }
        self.buffers: dict[str, np.ndarray] = {
            "bn1_mean": np.zeros(c.spatial_maps),
            "bn1_var": np.ones(c.spatial_maps),
            "bn2_mean": np.zeros(c.temporal_maps),
            "bn2_var": np.ones(c.temporal_maps),
        }

    def forward(self, tape: Tape, x: Tensor, train: bool) -> Tensor:
        c = self.config
        if x.data.ndim != 4 or x.shape[1:] != (1, c.electrodes, c.time_samples):
            raise ShapeError(
                f"expected (B, 1, {c.electrodes}, {c.time_samples}) input, got {x.shape}"
            )
        p, b = self.params, self.buffers
        h = diffnet.conv_spatial(tape, x, p["spatial_kernel"])
        h = diffnet.batch_norm(tape, h, p["bn1_gamma"], p["bn1_beta"],
                               b["bn1_mean"], b["bn1_var"], train)
        h = diffnet.elu(tape, h)
        h = diffnet.conv_temporal(tape, h, p["temporal_kernel"])
        h = diffnet.batch_norm(tape, h, p["bn2_gamma"], p["bn2_beta"],
                               b["bn2_mean"], b["bn2_var"], train)
        h = diffnet.elu(tape, h)
        h = diffnet.flatten(tape, h)
        h = diffnet.linear(tape, h, p["angle_w"], p["angle_b"])
        h = diffnet.angle_squash(tape, h)
        h = quantum_layer(tape, h, p["circuit_weights"])
        h = diffnet.linear(tape, h, p["proj_w"], p["proj_b"])
        return diffnet.l2_normalize(tape, h)


class ImageEmbedHead:
    """Linear -> angle squash -> quantum layer -> linear -> L2 norm over
    precomputed (frozen) backbone embeddings."""

    def __init__(self, config: ImageHeadConfig, rng: np.random.Generator):
        self.config = config
        c = config
        self.params: dict[str, Tensor] = {
            "angle_w": Tensor(ANGLE_INIT_SCALE * _glorot(rng, (c.input_dim, c.n_qubits),
                                                         c.input_dim, c.n_qubits)),
            "angle_b": Tensor(np.zeros(c.n_qubits)),
            "circuit_weights": Tensor(init_circuit_weights(rng, c.n_layers, c.n_qubits)),
            "proj_w": Tensor(_glorot(rng, (c.n_qubits, c.embed_dim),
                                     c.n_qubits, c.embed_dim)),
            "proj_b": Tensor(np.zeros(c.embed_dim)),
        }
        self.buffers: dict[str, np.ndarray] = {}

    def forward(self, tape: Tape, x: Tensor, train: bool = False) -> Tensor:
        c = self.config
        if x.data.ndim != 2 or x.shape[1] != c.input_dim:
            raise ShapeError(f"expected (B, {c.input_dim}) embeddings, got {x.shape}")
        p = self.params
        h = diffnet.linear(tape, x, p["angle_w"], p["angle_b"])
        h = diffnet.angle_squash(tape, h)
        h = quantum_layer(tape, h, p["circuit_weights"])
        h = diffnet.linear(tape, h, p["proj_w"], p["proj_b"])
        return diffnet.l2_normalize(tape, h)
