"""Direction-skill objective combined with the periodic intrinsic reward.

A second encoder phi_m rewards latent displacement along a skill direction
z under a unit 1-step latent distance constraint enforced by a learned
dual variable. Both encoders are mutually conditioned (z into the circular
encoder, L into phi_m) so the joint optimization does not collapse to one
short-periodic behavior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, norm_rows
from .encoder import embed_period_batch
from .nn import (
    AdamState,
    ConfigurationError,
    MlpSpec,
    NumericError,
    adam_step,
    init_mlp,
    mlp_apply,
    mlp_forward,
)


@dataclass
class MetraConfig:
    eps_m: float = 1e-3
    lambda_m_init: float = 30.0
    lambda_lr: float = 1e-4
    skill_dim: int = 2
    skill_kind: str = "continuous"
    alpha_psd: float = 1.0
    lr: float = 1e-4
    hidden_layers: int = 2
    hidden_units: int = 256
    latent_dim: int = 2
    mutual_conditioning: bool = True

    def __post_init__(self):
        if self.eps_m <= 0:
            raise ConfigurationError("eps_m must be positive")
        if self.skill_kind not in ("continuous", "discrete"):
            raise ConfigurationError(f"unknown skill kind: {self.skill_kind}")


@dataclass
class SkillVector:
    z: np.ndarray
    kind: str
    dim: int


def sample_skill(cfg: MetraConfig, rng: np.random.Generator) -> SkillVector:
    """Unit-norm Gaussian direction (continuous) or zero-centered one-hot."""
    if cfg.skill_dim < 1:
        raise ConfigurationError("skill_dim must be >= 1")
    if cfg.skill_kind == "continuous":
        z = rng.standard_normal(cfg.skill_dim)
        z = z / np.linalg.norm(z)
    else:
        z = np.full(cfg.skill_dim, -1.0 / cfg.skill_dim)
        z[rng.integers(cfg.skill_dim)] += 1.0
    return SkillVector(z=z, kind=cfg.skill_kind, dim=cfg.skill_dim)


class MetraEncoder:
    """phi_m network, its dual variable, and optimizer state."""

    def __init__(self, obs_dim: int, cfg: MetraConfig, rng: np.random.Generator,
                 embed_dim: int = 8):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.embed_dim = embed_dim if cfg.mutual_conditioning else 0
        self.spec = MlpSpec(
            input_dim=obs_dim + self.embed_dim,
            hidden_layers=cfg.hidden_layers,
            hidden_units=cfg.hidden_units,
            output_dim=cfg.latent_dim,
        )
        self.params = init_mlp(self.spec, rng, prefix="metra/")
        self.opt = AdamState(lr=cfg.lr)
        self.lambda_m = cfg.lambda_m_init
        self.lambda_opt = AdamState(lr=cfg.lambda_lr)

    def _inputs(self, obs, L) -> np.ndarray:
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        if not self.embed_dim:
            return obs
        n = obs.shape[0]
        Ls = np.broadcast_to(np.asarray(L), (n,))
        emb = embed_period_batch(Ls, self.embed_dim)
        return np.hstack([obs, emb])

    def encode(self, obs, L=None) -> np.ndarray:
        single = np.asarray(obs).ndim == 1
        out = mlp_forward(self.spec, self.params, self._inputs(obs, L),
                          prefix="metra/")
        return out[0] if single else out


def r_metra(encoder: MetraEncoder, s, s_next, z, L=None):
    """Latent displacement projected onto the skill direction."""
    p = encoder.encode(s, L)
    p_next = encoder.encode(s_next, L)
    disp = p_next - p
    if disp.ndim == 1:
        return float(disp @ np.asarray(z, dtype=np.float64))
    return np.einsum("ij,ij->i", disp, np.atleast_2d(np.asarray(z, dtype=np.float64)))


def metra_update(encoder: MetraEncoder, batch) -> dict:
    """One dual-gradient step: ascent on the encoder objective, ascent on
    the multiplier objective with projection onto lambda_m >= 0."""
    z, L, s, s_next = batch
    cfg = encoder.cfg
    tensors = encoder.params.as_tensors()
    x = Tensor(encoder._inputs(s, L))
    x_next = Tensor(encoder._inputs(s_next, L))
    p = mlp_apply(encoder.spec, tensors, x, prefix="metra/")
    p_next = mlp_apply(encoder.spec, tensors, x_next, prefix="metra/")
    disp = p_next - p
    along = (disp * Tensor(np.atleast_2d(z))).sum(axis=1)
    slack = (1.0 - (disp * disp).sum(axis=1)).minimum(cfg.eps_m)
    objective = (along + encoder.lambda_m * slack).mean()
    loss = -objective
    if not np.isfinite(loss.data):
        raise NumericError("non-finite phi_m loss")
    loss.backward()
    grads = {n: (t.grad if t.grad is not None else np.zeros_like(t.data))
             for n, t in tensors.items()}
    adam_step(encoder.opt, encoder.params, grads)

    # dual ascent on J_lambda = -lambda * E[slack]: d/dlambda = -E[slack]
    slack_mean = float(slack.data.mean())
    holder_grad = slack_mean  # descend on -J_lambda
    from .nn import ParamSet
    holder = ParamSet()
    holder.add("lambda_m", np.array([encoder.lambda_m]))
    adam_step(encoder.lambda_opt, holder, {"lambda_m": np.array([holder_grad])})
    encoder.lambda_m = max(0.0, float(holder["lambda_m"][0]))

    return {
        "metra_loss": float(loss.data),
        "lambda_m": encoder.lambda_m,
        "mean_slack": slack_mean,
        "metra_reward_mean": float(along.data.mean()),
    }
