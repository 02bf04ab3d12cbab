"""Small dense networks over spatial coordinates, with exact reverse-mode
parameter gradients and Adam updates. Everything is plain numpy so a
single-threaded run is bit-for-bit reproducible."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erf


class ShapeMismatch(Exception):
    pass


class NonFiniteGradient(Exception):
    pass


_SQRT2 = np.sqrt(2.0)


def _silu(x):
    return x / (1.0 + np.exp(-x))


def _silu_prime(x):
    s = 1.0 / (1.0 + np.exp(-x))
    return s * (1.0 + x * (1.0 - s))


def _gelu(x):
    return 0.5 * x * (1.0 + erf(x / _SQRT2))


def _gelu_prime(x):
    phi = np.exp(-0.5 * x * x) / np.sqrt(2.0 * np.pi)
    return 0.5 * (1.0 + erf(x / _SQRT2)) + x * phi


ACTIVATIONS = {
    "tanh": (np.tanh, lambda x: 1.0 - np.tanh(x) ** 2),
    "silu": (_silu, _silu_prime),
    "gelu": (_gelu, _gelu_prime),
}


@dataclass
class MlpConfig:
    input_dim: int
    output_dim: int
    hidden: list[int] = field(default_factory=lambda: [30, 30, 30])
    activation: str = "tanh"
    seed: int = 0

    def __post_init__(self):
        if not self.hidden or any(w < 1 for w in self.hidden):
            raise ValueError("hidden widths must be a non-empty list of ints >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {sorted(ACTIVATIONS)}")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim] + list(self.hidden) + [self.output_dim]
        return list(zip(dims[:-1], dims[1:]))


@dataclass
class MlpParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def flat(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b.ravel())
        return np.concatenate(parts)

    def with_flat(self, vec: np.ndarray) -> "MlpParams":
        weights, biases = [], []
        pos = 0
        for w, b in zip(self.weights, self.biases):
            weights.append(vec[pos : pos + w.size].reshape(w.shape))
            pos += w.size
            biases.append(vec[pos : pos + b.size].reshape(b.shape))
            pos += b.size
        if pos != vec.size:
            raise ShapeMismatch(f"flat vector has {vec.size} entries, expected {pos}")
        return MlpParams(weights, biases)

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init_mlp(cfg: MlpConfig) -> MlpParams:
    """Xavier-uniform weights, zero biases, deterministic for a fixed seed.

    The output layer starts at zero so a freshly initialized network is
    the zero function; training un-sticks it on the first step and the
    composed admissible field starts exactly at the particular solution.
    """
    rng = np.random.default_rng(cfg.seed)
    weights, biases = [], []
    dims = cfg.layer_dims
    for i, (fan_in, fan_out) in enumerate(dims):
        if i == len(dims) - 1:
            weights.append(np.zeros((fan_in, fan_out)))
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def zero_mlp(cfg: MlpConfig) -> MlpParams:
    weights = [np.zeros((fi, fo)) for fi, fo in cfg.layer_dims]
    biases = [np.zeros(fo) for _, fo in cfg.layer_dims]
    return MlpParams(weights, biases)


def _forward_cached(params: MlpParams, x: np.ndarray, activation: str):
    act, _ = ACTIVATIONS[activation]
    pre = []
    h = x
    hs = [h]
    n_layers = len(params.weights)
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        h = act(z) if i < n_layers - 1 else z  # linear output layer
        hs.append(h)
    return hs, pre


def forward_nodes(params: MlpParams, nodes: np.ndarray, activation: str = "tanh") -> np.ndarray:
    """Network outputs, one row per input row."""
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or nodes.shape[1] != params.weights[0].shape[0]:
        raise ShapeMismatch(
            f"input shape {nodes.shape} does not match input_dim "
            f"{params.weights[0].shape[0]}"
        )
    hs, _ = _forward_cached(params, nodes, activation)
    return hs[-1]


def vjp_params(
    params: MlpParams, nodes: np.ndarray, cotangent: np.ndarray, activation: str = "tanh"
) -> MlpParams:
    """Exact gradient of sum(outputs * cotangent) with respect to all
    parameters (reverse accumulation)."""
    nodes = np.asarray(nodes, dtype=float)
    cot = np.asarray(cotangent, dtype=float)
    hs, pre = _forward_cached(params, nodes, activation)
    if cot.shape != hs[-1].shape:
        raise ShapeMismatch(f"cotangent shape {cot.shape} != output shape {hs[-1].shape}")
    _, act_prime = ACTIVATIONS[activation]
    n_layers = len(params.weights)
    gw = [None] * n_layers
    gb = [None] * n_layers
    delta = cot
    for i in range(n_layers - 1, -1, -1):
        gw[i] = hs[i].T @ delta
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * act_prime(pre[i - 1])
    return MlpParams(gw, gb)


@dataclass
class OptimState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: MlpParams, lr: float = 1e-3, **kw) -> "OptimState":
        n = params.flat().size
        return cls(m=np.zeros(n), v=np.zeros(n), lr=lr, **kw)


def adam_step(params: MlpParams, grads: MlpParams, state: OptimState) -> tuple[MlpParams, OptimState]:
    """Bias-corrected Adam update; returns fresh params and state."""
    theta = params.flat()
    g = grads.flat()
    if g.size != theta.size:
        raise ShapeMismatch("gradient size does not match parameter size")
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradient("gradient contains NaN or Inf")
    step = state.step + 1
    m = state.beta1 * state.m + (1 - state.beta1) * g
    v = state.beta2 * state.v + (1 - state.beta2) * g * g
    m_hat = m / (1 - state.beta1**step)
    v_hat = v / (1 - state.beta2**step)
    theta = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    new_state = OptimState(
        m=m, v=v, step=step, lr=state.lr, beta1=state.beta1,
        beta2=state.beta2, eps=state.eps,
    )
    return params.with_flat(theta), new_state


# Checkpoint format: little-endian uint32 layer count, then per layer
# uint32 (fan_in, fan_out), then the flat float64 parameter array.

def save_params(params: MlpParams, path: str) -> None:
    dims = [(w.shape[0], w.shape[1]) for w in params.weights]
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", len(dims)))
        for fi, fo in dims:
            fh.write(struct.pack("<II", fi, fo))
        fh.write(params.flat().astype("<f8").tobytes())


def load_params(path: str) -> MlpParams:
    with open(path, "rb") as fh:
        (n_layers,) = struct.unpack("<I", fh.read(4))
        dims = [struct.unpack("<II", fh.read(8)) for _ in range(n_layers)]
        flat = np.frombuffer(fh.read(), dtype="<f8")
    template = MlpParams(
        [np.zeros((fi, fo)) for fi, fo in dims], [np.zeros(fo) for _, fo in dims]
    )
    return template.with_flat(flat.copy())
