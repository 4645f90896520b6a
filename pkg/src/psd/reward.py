"""Intrinsic and external reward terms and their combination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoder import PsdEncoder, optimal_chord
from .nn import ConfigurationError


@dataclass
class RewardConfig:
    kappa: float = 10.0
    v_star: float = 0.5
    use_ext: bool = False
    alpha_psd: float = 1.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise ConfigurationError("kappa must be positive")
        if self.v_star <= 0:
            raise ConfigurationError("v_star must be positive")


def delta(encoder: PsdEncoder, s_t, s_t1, L, z=None):
    """Deviation of the 1-step latent displacement from the optimal chord.

    Accepts single observations or batches; vectorized over rows.
    """
    p_t = encoder.encode(s_t, L, z)
    p_t1 = encoder.encode(s_t1, L, z)
    if p_t.ndim == 1:
        dist = float(np.linalg.norm(p_t1 - p_t))
        return dist - optimal_chord(int(L))
    dist = np.linalg.norm(p_t1 - p_t, axis=1)
    L = np.asarray(L, dtype=np.float64)
    return dist - L * np.sin(np.pi / (2.0 * L))


def r_psd(dev, kappa: float):
    """exp(-kappa * delta^2); in (0, 1], peaked at zero deviation."""
    if kappa <= 0:
        raise ConfigurationError("kappa must be positive")
    return np.exp(-kappa * np.square(dev))


def r_ext(v_x, v_star: float):
    """1 above the velocity threshold, linear v_x / v_star below it."""
    if v_star <= 0:
        raise ConfigurationError("v_star must be positive")
    return np.minimum(np.asarray(v_x, dtype=np.float64) / v_star, 1.0)


def combine(r_psd_val, r_ext_val=None, r_metra_val=None, cfg: RewardConfig | None = None):
    """Sum of the enabled reward terms with alpha_psd scaling the intrinsic one."""
    alpha = 1.0 if cfg is None else cfg.alpha_psd
    total = alpha * np.asarray(r_psd_val, dtype=np.float64)
    if r_ext_val is not None:
        total = total + r_ext_val
    if r_metra_val is not None:
        total = total + r_metra_val
    return total
