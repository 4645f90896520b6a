"""Adaptive curriculum over the period range [L_min, L_max].

Each bound is evaluated by the average cumulative intrinsic reward of the
policy conditioned on it. A bound expands when the policy nearly saturates
the per-episode reward ceiling T, and is allowed to contract on poor
performance only after its first expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import ConfigurationError
from .reward import r_psd, delta


@dataclass
class SamplingBounds:
    L_min: int
    L_max: int
    floor: int = 5
    N: int = 1
    alpha: float = 0.9
    beta: float = 0.4
    interval_episodes: int = 1000
    eval_episodes: int = 5
    updated_once_min: bool = False
    updated_once_max: bool = False
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not (self.floor <= self.L_min <= self.L_max):
            raise ConfigurationError(
                f"need floor <= L_min <= L_max, got {self.floor}, "
                f"{self.L_min}, {self.L_max}"
            )
        if not (self.alpha > self.beta > 0):
            raise ConfigurationError("need alpha > beta > 0")

    def training_values(self, count: int = 4) -> list[int]:
        """`count` discrete L values spread uniformly over the range,
        inclusive of both bounds."""
        vals = np.linspace(self.L_min, self.L_max, count)
        return sorted(set(int(round(v)) for v in vals))


def evaluate_bound(agent, encoder, spec, L: int, eval_episodes: int,
                   kappa: float, seed_base: int = 10_000) -> float:
    """Mean per-episode cumulative intrinsic reward at period L, using
    mean-mode actions and dedicated evaluation seeds."""
    from .sac import rollout_episode

    returns = []
    for i in range(eval_episodes):
        traj = rollout_episode(agent, spec, L, seed=seed_base + i, mode="mean")
        devs = delta(encoder, traj.states, np.vstack(
            [traj.states[1:], traj.final_state[None, :]]), np.full(len(traj), L))
        returns.append(float(r_psd(devs, kappa).sum()))
    return float(np.mean(returns))


def update_bounds(bounds: SamplingBounds, r_min: float, r_max: float,
                  T: int) -> SamplingBounds:
    """Apply the expansion/contraction rules in place and return bounds."""
    new_min, new_max = bounds.L_min, bounds.L_max
    set_min_flag = set_max_flag = False

    if r_min > bounds.alpha * T:
        new_min = max(bounds.floor, bounds.L_min - bounds.N)
        set_min_flag = True
    elif r_min < bounds.beta * T and bounds.updated_once_min:
        new_min = bounds.L_min + bounds.N

    if r_max > bounds.alpha * T:
        new_max = bounds.L_max + bounds.N
        set_max_flag = True
    elif r_max < bounds.beta * T and bounds.updated_once_max:
        new_max = bounds.L_max - bounds.N

    # discard updates that would cross the bounds
    if new_min > new_max:
        return bounds
    bounds.L_min, bounds.L_max = new_min, new_max
    bounds.updated_once_min = bounds.updated_once_min or set_min_flag
    bounds.updated_once_max = bounds.updated_once_max or set_max_flag
    return bounds
