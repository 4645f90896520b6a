"""Circular latent encoder and its constrained training objective.

The encoder maps (state, period embedding[, skill vector]) to a d-dim
latent. Training drives states L steps apart to opposite points of a
circle of diameter L, consecutive states to chords of length L*sin(pi/2L)
(the side of a regular 2L-gon inscribed in that circle), and the circle
center to the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, norm_rows
from .nn import AdamState, ConfigurationError, MlpSpec, ParamSet, adam_step, grad, \
    init_mlp, mlp_apply, mlp_forward

NORM_FLOOR = 1e-12


def embed_period(L: int, D: int) -> np.ndarray:
    """Sinusoidal embedding of the integer period, dims alternating
    sin(L*w_i)/cos(L*w_i) with w_i = 10000^(-2*floor(i/2)/D)."""
    if D < 2 or D % 2 != 0:
        raise ConfigurationError(f"embedding dim must be even and >= 2, got {D}")
    if L < 0:
        raise ConfigurationError(f"period must be >= 0, got {L}")
    return embed_period_batch(np.array([L]), D)[0]


def embed_period_batch(Ls: np.ndarray, D: int) -> np.ndarray:
    """Vectorized sinusoidal embedding: one row per period value."""
    if D < 2 or D % 2 != 0:
        raise ConfigurationError(f"embedding dim must be even and >= 2, got {D}")
    Ls = np.asarray(Ls, dtype=np.float64)
    if np.any(Ls < 0):
        raise ConfigurationError("periods must be >= 0")
    i = np.arange(D)
    omega = 10000.0 ** (-2.0 * (i // 2) / D)
    phase = Ls[:, None] * omega[None, :]
    return np.where(i % 2 == 0, np.sin(phase), np.cos(phase))


def optimal_chord(L: int) -> float:
    """Side length of a regular 2L-gon inscribed in a circle of diameter L."""
    if L < 1:
        raise ConfigurationError(f"L must be >= 1, got {L}")
    return L * np.sin(np.pi / (2.0 * L))


@dataclass
class PsdEncoderConfig:
    d: int = 3
    D: int = 8
    k: float = 0.5
    eps: float = 1e-5
    lambda1: float = 5.0
    lambda2: float = 5.0
    lr: float = 1e-4
    batch: int = 1024
    hidden_layers: int = 2
    hidden_units: int = 256
    allow_small_d: bool = False

    def __post_init__(self):
        if self.k <= 0 or self.eps <= 0:
            raise ConfigurationError("k and eps must be positive")
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ConfigurationError("multipliers must be >= 0")
        if self.d < 3 and not self.allow_small_d:
            raise ConfigurationError(
                "latent dim < 3 is unstable; set allow_small_d to override"
            )


class PsdEncoder:
    """Encoder network plus its optimizer state."""

    def __init__(self, obs_dim: int, cfg: PsdEncoderConfig,
                 rng: np.random.Generator, skill_dim: int = 0):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.skill_dim = skill_dim
        self.spec = MlpSpec(
            input_dim=obs_dim + cfg.D + skill_dim,
            hidden_layers=cfg.hidden_layers,
            hidden_units=cfg.hidden_units,
            output_dim=cfg.d,
        )
        self.params = init_mlp(self.spec, rng, prefix="enc/")
        self.opt = AdamState(lr=cfg.lr)

    def _inputs(self, obs: np.ndarray, L, z: np.ndarray | None = None) -> np.ndarray:
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        n = obs.shape[0]
        Ls = np.broadcast_to(np.asarray(L), (n,))
        emb = embed_period_batch(Ls, self.cfg.D)
        parts = [obs, emb]
        if self.skill_dim:
            if z is None:
                raise ConfigurationError("encoder expects a skill vector input")
            z = np.atleast_2d(np.asarray(z, dtype=np.float64))
            parts.append(np.broadcast_to(z, (n, self.skill_dim)))
        return np.hstack(parts)

    def encode(self, obs: np.ndarray, L, z: np.ndarray | None = None) -> np.ndarray:
        """Latent point(s) for observation(s); deterministic."""
        single = np.asarray(obs).ndim == 1
        out = mlp_forward(self.spec, self.params, self._inputs(obs, L, z),
                          prefix="enc/")
        return out[0] if single else out


def psd_encoder_loss(encoder: PsdEncoder, tensors: dict, batch) -> Tensor:
    """Negated circular-representation objective for a tuple batch.

    `batch` is (L, s_t, s_t1, s_tL[, z]) as arrays; the loss is the mean of
      -|phi(s_tL)-phi(s_t)| + k*|phi(s_tL)+phi(s_t)|
      - lambda1*min(eps, L - |phi(s_tL)-phi(s_t)|)
      - lambda2*min(eps, L*sin(pi/2L) - |phi(s_t1)-phi(s_t)|)
    """
    cfg = encoder.cfg
    L, s_t, s_t1, s_tL = batch[:4]
    z = batch[4] if len(batch) > 4 else None
    if len(np.atleast_1d(L)) == 0:
        raise ConfigurationError("empty encoder batch")
    L = np.asarray(L, dtype=np.float64)
    chord = L * np.sin(np.pi / (2.0 * L))

    x_t = Tensor(encoder._inputs(s_t, L, z))
    x_t1 = Tensor(encoder._inputs(s_t1, L, z))
    x_tL = Tensor(encoder._inputs(s_tL, L, z))
    p_t = mlp_apply(encoder.spec, tensors, x_t, prefix="enc/")
    p_t1 = mlp_apply(encoder.spec, tensors, x_t1, prefix="enc/")
    p_tL = mlp_apply(encoder.spec, tensors, x_tL, prefix="enc/")

    dist_L = norm_rows(p_tL - p_t, NORM_FLOOR)
    anti = norm_rows(p_tL + p_t, NORM_FLOOR)
    dist_1 = norm_rows(p_t1 - p_t, NORM_FLOOR)

    objective = (
        dist_L
        - cfg.k * anti
        + cfg.lambda1 * (Tensor(L) - dist_L).minimum(cfg.eps)
        + cfg.lambda2 * (Tensor(chord) - dist_1).minimum(cfg.eps)
    )
    return -objective.mean()


def encoder_batch_metrics(encoder: PsdEncoder, batch) -> dict:
    L, s_t, s_t1, s_tL = batch[:4]
    z = batch[4] if len(batch) > 4 else None
    p_t = encoder.encode(s_t, L, z)
    p_t1 = encoder.encode(s_t1, L, z)
    p_tL = encoder.encode(s_tL, L, z)
    return {
        "mean_1step_dist": float(np.linalg.norm(p_t1 - p_t, axis=1).mean()),
        "mean_Lstep_dist": float(np.linalg.norm(p_tL - p_t, axis=1).mean()),
        "mean_antipodal_sum": float(np.linalg.norm(p_tL + p_t, axis=1).mean()),
    }


def train_encoder_step(encoder: PsdEncoder, batch) -> dict:
    """One Adam step on the encoder loss; returns batch metrics."""
    tensors = encoder.params.as_tensors()
    loss = psd_encoder_loss(encoder, tensors, batch)
    loss.backward()
    grads = {n: (t.grad if t.grad is not None else np.zeros_like(t.data))
             for n, t in tensors.items()}
    adam_step(encoder.opt, encoder.params, grads)
    metrics = encoder_batch_metrics(encoder, batch)
    metrics["loss"] = float(loss.data)
    return metrics
