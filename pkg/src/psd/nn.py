"""MLPs, parameter collections, Adam, and Polyak target averaging."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor


class ConfigurationError(ValueError):
    pass


class NumericError(ArithmeticError):
    pass


class ParamSet:
    """Ordered, named collection of float64 parameter arrays.

    Shapes are fixed at insertion; values must stay finite.
    """

    def __init__(self):
        self._arrays: dict[str, np.ndarray] = {}

    def add(self, name: str, values: np.ndarray) -> None:
        if name in self._arrays:
            raise ConfigurationError(f"duplicate parameter name: {name}")
        values = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise NumericError(f"non-finite values in parameter {name}")
        self._arrays[name] = values

    def names(self) -> list[str]:
        return list(self._arrays)

    def __getitem__(self, name: str) -> np.ndarray:
        return self._arrays[name]

    def __setitem__(self, name: str, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=np.float64)
        if name in self._arrays and values.shape != self._arrays[name].shape:
            raise ConfigurationError(f"shape change for parameter {name}")
        if not np.all(np.isfinite(values)):
            raise NumericError(f"non-finite values in parameter {name}")
        self._arrays[name] = values

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __len__(self) -> int:
        return len(self._arrays)

    def items(self):
        return self._arrays.items()

    def copy(self) -> "ParamSet":
        out = ParamSet()
        for name, arr in self._arrays.items():
            out.add(name, arr.copy())
        return out

    def subset(self, prefix: str) -> "ParamSet":
        out = ParamSet()
        for name, arr in self._arrays.items():
            if name.startswith(prefix):
                out.add(name, arr)
        return out

    def as_tensors(self) -> dict[str, Tensor]:
        return {n: Tensor(a, requires_grad=True) for n, a in self._arrays.items()}


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_layers: int = 2
    hidden_units: int = 256
    output_dim: int = 1
    activation: str = "relu"

    def __post_init__(self):
        if self.input_dim < 1 or self.output_dim < 1 or self.hidden_units < 1:
            raise ConfigurationError("MLP dims must be >= 1")
        if self.hidden_layers < 0:
            raise ConfigurationError("hidden_layers must be >= 0")
        if self.activation not in ("relu", "tanh"):
            raise ConfigurationError(f"unknown activation: {self.activation}")

    def layer_dims(self) -> list[tuple[int, int]]:
        dims = [self.input_dim] + [self.hidden_units] * self.hidden_layers
        dims.append(self.output_dim)
        return list(zip(dims[:-1], dims[1:]))


def init_mlp(spec: MlpSpec, rng: np.random.Generator, prefix: str = "") -> ParamSet:
    """Uniform fan-in init for weights, zero biases."""
    params = ParamSet()
    for i, (fan_in, fan_out) in enumerate(spec.layer_dims()):
        bound = 1.0 / np.sqrt(fan_in)
        params.add(f"{prefix}W{i}", rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        params.add(f"{prefix}b{i}", np.zeros(fan_out))
    return params


def mlp_apply(
    spec: MlpSpec, tensors: dict[str, Tensor], x: Tensor, prefix: str = ""
) -> Tensor:
    """Differentiable forward pass; x is (batch, input_dim)."""
    n_layers = spec.hidden_layers + 1
    h = x
    for i in range(n_layers):
        h = h @ tensors[f"{prefix}W{i}"] + tensors[f"{prefix}b{i}"]
        if i < n_layers - 1:
            h = h.relu() if spec.activation == "relu" else h.tanh()
    return h


def mlp_forward(
    spec: MlpSpec, params: ParamSet, x: np.ndarray, prefix: str = ""
) -> np.ndarray:
    """Plain numpy forward pass (no graph) for rollouts and targets."""
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.shape[1] != spec.input_dim:
        raise ConfigurationError(
            f"input dim {x.shape[1]} does not match spec {spec.input_dim}"
        )
    n_layers = spec.hidden_layers + 1
    h = x
    for i in range(n_layers):
        w, b = params[f"{prefix}W{i}"], params[f"{prefix}b{i}"]
        if w.shape[0] != h.shape[1]:
            raise ConfigurationError(f"weight {prefix}W{i} does not match input")
        h = h @ w + b
        if i < n_layers - 1:
            h = np.maximum(h, 0.0) if spec.activation == "relu" else np.tanh(h)
    return h[0] if squeeze else h


def grad(loss_fn, params: ParamSet) -> dict[str, np.ndarray]:
    """Gradient of a scalar loss w.r.t. every array in `params`.

    `loss_fn` receives a dict of Tensors (same names) and returns a scalar
    Tensor. Missing gradients come back as zeros.
    """
    tensors = params.as_tensors()
    loss = loss_fn(tensors)
    if not np.isfinite(loss.data):
        raise NumericError("non-finite loss")
    loss.backward()
    out = {}
    for name, t in tensors.items():
        out[name] = t.grad if t.grad is not None else np.zeros_like(t.data)
    return out


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(state: AdamState, params: ParamSet, grads: dict[str, np.ndarray]) -> None:
    """In-place bias-corrected Adam update; descends along the gradient."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**state.step
    bc2 = 1.0 - b2**state.step
    for name, g in grads.items():
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        state.m[name] = b1 * state.m[name] + (1.0 - b1) * g
        state.v[name] = b2 * state.v[name] + (1.0 - b2) * g * g
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        params[name] = params[name] - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def polyak_update(target: ParamSet, online: ParamSet, tau: float) -> None:
    """target <- tau * target + (1 - tau) * online, in place."""
    if set(target.names()) != set(online.names()):
        raise ConfigurationError("target/online parameter names differ")
    if not 0.0 <= tau <= 1.0:
        raise ConfigurationError("tau must lie in [0, 1]")
    for name in target.names():
        target[name] = tau * target[name] + (1.0 - tau) * online[name]
