"""Minimal dense-tensor reverse-mode differentiation engine.

Every forward pass records backward closures on a fresh ``Tape``; calling
``tape.backward(loss)`` replays them in reverse and accumulates gradients
into each ``Tensor.grad``.  Tapes are never reused across steps.

The op set is exactly what the encoders and the contrastive objective need:
a dense linear layer, the two EEG convolutions (a spatial convolution that
collapses the electrode axis, then a 1-D temporal convolution), batch
normalization, ELU, an angle squash pi*tanh(x) used to bound rotation
angles, row-wise L2 normalization, and reshape.  Optimization is Adam with
bias correction and optional decoupled weight decay.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NumericError, ShapeError


class Tensor:
    """Dense double-precision array with a gradient slot."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape})"


class Tape:
    """Record of one forward pass, replayed in reverse for gradients."""

    def __init__(self):
        self._ops: list[Callable[[], None]] = []

    def record(self, backward_fn: Callable[[], None]) -> None:
        self._ops.append(backward_fn)

    def backward(self, loss: Tensor) -> None:
        if loss.data.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        loss.grad = np.ones_like(loss.data)
        for fn in reversed(self._ops):
            fn()


def _grad_of(t: Tensor) -> np.ndarray | None:
    # None means the value never reached the loss; nothing to propagate.
    return t.grad


# ---------------------------------------------------------------------------
# Ops


def linear(tape: Tape, x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """y = x @ w + b for x of shape (batch, in)."""
    if x.data.ndim != 2 or w.data.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeError(f"linear: cannot multiply {x.shape} by {w.shape}")
    if b.shape != (w.shape[1],):
        raise ShapeError(f"linear: bias shape {b.shape} != ({w.shape[1]},)")
    out = Tensor(x.data @ w.data + b.data)

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        x.accumulate(g @ w.data.T)
        w.accumulate(x.data.T @ g)
        b.accumulate(g.sum(axis=0))

    tape.record(backward)
    return out


def conv_spatial(tape: Tape, x: Tensor, kernel: Tensor) -> Tensor:
    """Collapse the electrode axis of (B, 1, E, T) into feature maps.

    The kernel spans the full electrode axis: shape (F, 1, E, 1), stride 1,
    no padding, so the output is (B, F, 1, T).
    """
    if x.data.ndim != 4 or x.shape[1] != 1:
        raise ShapeError(f"conv_spatial: expected (B, 1, E, T) input, got {x.shape}")
    if kernel.data.ndim != 4 or kernel.shape[1] != 1 or kernel.shape[3] != 1:
        raise ShapeError(
            f"conv_spatial: expected (F, 1, E, 1) kernel, got {kernel.shape}"
        )
    if kernel.shape[2] != x.shape[2]:
        raise ShapeError(
            f"conv_spatial: kernel spans {kernel.shape[2]} electrodes, "
            f"input has {x.shape[2]}"
        )
    xs = x.data[:, 0]  # (B, E, T)
    ks = kernel.data[:, 0, :, 0]  # (F, E)
    out = Tensor(np.einsum("bet,fe->bft", xs, ks)[:, :, None, :])

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        gs = g[:, :, 0, :]  # (B, F, T)
        x.accumulate(np.einsum("bft,fe->bet", gs, ks)[:, None])
        kernel.accumulate(np.einsum("bft,bet->fe", gs, xs)[:, None, :, None])

    tape.record(backward)
    return out


def conv_temporal(tape: Tape, x: Tensor, kernel: Tensor, stride: int = 1) -> Tensor:
    """1-D convolution along the time axis of (B, F, 1, T).

    Kernel shape (G, F, 1, k); output (B, G, 1, T') with
    T' = floor((T - k) / stride) + 1.  No padding.
    """
    if x.data.ndim != 4 or x.shape[2] != 1:
        raise ShapeError(f"conv_temporal: expected (B, F, 1, T) input, got {x.shape}")
    if kernel.data.ndim != 4 or kernel.shape[2] != 1:
        raise ShapeError(
            f"conv_temporal: expected (G, F, 1, k) kernel, got {kernel.shape}"
        )
    if kernel.shape[1] != x.shape[1]:
        raise ShapeError(
            f"conv_temporal: kernel expects {kernel.shape[1]} maps, input has {x.shape[1]}"
        )
    if stride < 1:
        raise ConfigurationError(f"stride must be >= 1, got {stride}")
    k = kernel.shape[3]
    t_in = x.shape[3]
    if k > t_in:
        raise ShapeError(f"conv_temporal: kernel length {k} exceeds input length {t_in}")
    t_out = (t_in - k) // stride + 1

    xs = x.data[:, :, 0, :]  # (B, F, T)
    ks = kernel.data[:, :, 0, :]  # (G, F, k)
    windows = np.lib.stride_tricks.sliding_window_view(xs, k, axis=-1)[:, :, ::stride]
    windows = windows[:, :, :t_out]  # (B, F, T', k)
    out = Tensor(np.einsum("bftk,gfk->bgt", windows, ks)[:, :, None, :])

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        gs = g[:, :, 0, :]  # (B, G, T')
        kernel.accumulate(np.einsum("bgt,bftk->gfk", gs, windows)[:, :, None, :])
        gx = np.zeros_like(xs)
        spread = np.einsum("bgt,gfk->bftk", gs, ks)
        for off in range(k):
            gx[:, :, off : off + t_out * stride : stride] += spread[:, :, :, off]
        x.accumulate(gx[:, :, None, :])

    tape.record(backward)
    return out


def batch_norm(
    tape: Tape,
    x: Tensor,
    gamma: Tensor,
    beta: Tensor,
    running_mean: np.ndarray,
    running_var: np.ndarray,
    train: bool,
    momentum: float = 0.1,
    eps: float = 1e-5,
) -> Tensor:
    """Per-feature standardization with a learned affine map.

    Axis 1 is the feature axis for both (B, C) and (B, C, 1, T) inputs.  In
    train mode the batch statistics are used and the running statistics are
    updated in place; in eval mode the running statistics are used.
    """
    if x.data.ndim not in (2, 4):
        raise ShapeError(f"batch_norm: expected 2-D or 4-D input, got {x.shape}")
    channels = x.shape[1]
    if gamma.shape != (channels,) or beta.shape != (channels,):
        raise ShapeError("batch_norm: gamma/beta must match the feature axis")
    axes = (0,) if x.data.ndim == 2 else (0, 2, 3)
    cast = (lambda a: a) if x.data.ndim == 2 else (lambda a: a[:, None, None])
    count = int(np.prod([x.shape[i] for i in axes]))
    if train and count < 2:
        raise ConfigurationError("batch_norm: train mode needs at least 2 samples")

    if train:
        mean = x.data.mean(axis=axes)
        var = x.data.var(axis=axes)
        running_mean *= 1.0 - momentum
        running_mean += momentum * mean
        running_var *= 1.0 - momentum
        running_var += momentum * var * count / (count - 1)
    else:
        mean = running_mean
        var = running_var

    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = (x.data - cast(mean)) * cast(inv_std)
    out = Tensor(cast(gamma.data) * x_hat + cast(beta.data))

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        gamma.accumulate((g * x_hat).sum(axis=axes))
        beta.accumulate(g.sum(axis=axes))
        g_hat = g * cast(gamma.data)
        if train:
            # Batch statistics depend on x, so propagate through mean and var.
            g_sum = g_hat.sum(axis=axes)
            gx_sum = (g_hat * x_hat).sum(axis=axes)
            dx = (g_hat - cast(g_sum / count) - x_hat * cast(gx_sum / count)) * cast(
                inv_std
            )
        else:
            dx = g_hat * cast(inv_std)
        x.accumulate(dx)

    tape.record(backward)
    return out


def elu(tape: Tape, x: Tensor) -> Tensor:
    """x for x > 0, exp(x) - 1 otherwise (alpha = 1)."""
    positive = x.data > 0
    out = Tensor(np.where(positive, x.data, np.expm1(x.data)))

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        x.accumulate(g * np.where(positive, 1.0, out.data + 1.0))

    tape.record(backward)
    return out


def angle_squash(tape: Tape, x: Tensor) -> Tensor:
    """pi * tanh(x): squashes features into the open interval (-pi, pi)."""
    t = np.tanh(x.data)
    out = Tensor(np.pi * t)

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        x.accumulate(g * np.pi * (1.0 - t * t))

    tape.record(backward)
    return out


def l2_normalize(tape: Tape, x: Tensor) -> Tensor:
    """Scale every row of (B, D) to unit Euclidean norm."""
    if x.data.ndim != 2:
        raise ShapeError(f"l2_normalize: expected (B, D) input, got {x.shape}")
    norms = np.linalg.norm(x.data, axis=1, keepdims=True)
    if np.any(norms < 1e-12):
        raise NumericError("l2_normalize: degenerate zero-norm row")
    y = x.data / norms
    out = Tensor(y)

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        x.accumulate((g - y * (g * y).sum(axis=1, keepdims=True)) / norms)

    tape.record(backward)
    return out


def reshape(tape: Tape, x: Tensor, shape: tuple[int, ...]) -> Tensor:
    out = Tensor(x.data.reshape(shape))

    def backward():
        g = _grad_of(out)
        if g is None:
            return
        x.accumulate(g.reshape(x.data.shape))

    tape.record(backward)
    return out


def flatten(tape: Tape, x: Tensor) -> Tensor:
    """Collapse everything after the batch axis."""
    return reshape(tape, x, (x.shape[0], -1))


# ---------------------------------------------------------------------------
# Optimizer


@dataclass
class AdamState:
    """Per-parameter Adam moments plus hyperparameters."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 0.0002
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0

    @classmethod
    def for_param(cls, param: np.ndarray, **hyper) -> "AdamState":
        return cls(m=np.zeros_like(param), v=np.zeros_like(param), **hyper)


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState) -> np.ndarray:
    """One Adam update with bias correction and decoupled weight decay."""
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise ShapeError(
            f"adam_step: mismatched shapes {params.shape} / {grads.shape} / {state.m.shape}"
        )
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads**2
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    update = m_hat / (np.sqrt(v_hat) + state.eps)
    if state.weight_decay != 0.0:
        update = update + state.weight_decay * params
    # asarray keeps 0-d parameters (e.g. a scalar temperature) as ndarrays
    return np.asarray(params - state.lr * update)


class Adam:
    """Adam over a named collection of parameter tensors."""

    def __init__(
        self,
        params: dict[str, Tensor],
        lr: float = 0.0002,
        beta1: float = 0.5,
        beta2: float = 0.999,
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params = params
        self.states = {
            name: AdamState.for_param(
                t.data, lr=lr, beta1=beta1, beta2=beta2, eps=eps,
                weight_decay=weight_decay,
            )
            for name, t in params.items()
        }

    def zero_grad(self) -> None:
        for t in self.params.values():
            t.grad = None

    def step(self) -> None:
        for name, t in self.params.items():
            if t.grad is None:
                continue
            t.data = adam_step(t.data, t.grad, self.states[name])
