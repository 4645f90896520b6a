"""Deterministic toy environments with analytically known periodic structure.

ring_world: a point on a circle whose angular velocity is set directly by
the action, plus frozen low-amplitude distractor channels. Constant angular
velocity pi/L makes the phase channels exactly 2L-periodic.

swing_mass: a damped driven oscillator where period control requires
nontrivial torque sequences.

tempo_track: ring_world with a hidden target period that switches every
100 steps; the downstream task for the hierarchical controller.

plane_ring: ring_world phase plus a freely translating 2-D position, so
movement direction and rotation period can be controlled independently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import ConfigurationError

TWO_PI = 2.0 * np.pi
OMEGA_MAX = np.pi / 4.0
SWING_DT = 0.05
TEMPO_PERIODS = (12, 20, 32)
TEMPO_SWITCH_EVERY = 100
TEMPO_TOL = 0.15
DISTRACTOR_DIM = 4
DISTRACTOR_SIGMA = 0.01

_ENV_DIMS = {
    "ring_world": (3 + DISTRACTOR_DIM, 1),
    "swing_mass": (2, 1),
    "tempo_track": (3 + DISTRACTOR_DIM, 1),
    "plane_ring": (4, 3),
}


class InfeasiblePeriodError(ValueError):
    pass


@dataclass(frozen=True)
class EnvSpec:
    name: str
    obs_dim: int
    act_dim: int
    episode_length: int = 200
    action_bound: float = 1.0


@dataclass
class EnvState:
    observation: np.ndarray
    step_index: int
    internal: np.ndarray


@dataclass
class StepInfo:
    v_x: float
    task_reward: float = 0.0
    s_task: float = 0.0


def make_spec(name: str, episode_length: int | None = None) -> EnvSpec:
    if name not in _ENV_DIMS:
        raise ConfigurationError(f"unknown env name: {name}")
    obs_dim, act_dim = _ENV_DIMS[name]
    if episode_length is None:
        episode_length = 500 if name == "tempo_track" else 200
    return EnvSpec(name=name, obs_dim=obs_dim, act_dim=act_dim,
                   episode_length=episode_length)


def _ring_obs(theta, omega_prev, distractor):
    return np.concatenate([[np.cos(theta), np.sin(theta), omega_prev], distractor])


def reset(spec: EnvSpec, seed: int) -> EnvState:
    rng = np.random.default_rng(seed)
    if spec.name in ("ring_world", "tempo_track"):
        theta = rng.uniform(0.0, TWO_PI)
        distractor = rng.normal(0.0, DISTRACTOR_SIGMA, size=DISTRACTOR_DIM)
        internal = np.concatenate([[theta, 0.0], distractor])
        return EnvState(_ring_obs(theta, 0.0, distractor), 0, internal)
    if spec.name == "swing_mass":
        x = rng.uniform(-0.5, 0.5)
        v = rng.uniform(-0.5, 0.5)
        return EnvState(np.array([x, v]), 0, np.array([x, v]))
    if spec.name == "plane_ring":
        theta = rng.uniform(0.0, TWO_PI)
        internal = np.array([theta, 0.0, 0.0])
        obs = np.array([np.cos(theta), np.sin(theta), 0.0, 0.0])
        return EnvState(obs, 0, internal)
    raise ConfigurationError(f"unknown env name: {spec.name}")


def tempo_target_period(t: int) -> int:
    return TEMPO_PERIODS[(t // TEMPO_SWITCH_EVERY) % len(TEMPO_PERIODS)]


def step(spec: EnvSpec, state: EnvState, action) -> tuple[EnvState, StepInfo]:
    a = np.clip(np.asarray(action, dtype=np.float64), -1.0, 1.0)
    t = state.step_index

    if spec.name in ("ring_world", "tempo_track"):
        theta, _ = state.internal[0], state.internal[1]
        distractor = state.internal[2:]
        omega = float(a[0]) * OMEGA_MAX
        theta_new = (theta + omega) % TWO_PI
        internal = np.concatenate([[theta_new, omega], distractor])
        obs = _ring_obs(theta_new, omega, distractor)
        new_state = EnvState(obs, t + 1, internal)
        info = StepInfo(v_x=omega / OMEGA_MAX)
        if spec.name == "tempo_track":
            period = tempo_target_period(t)
            target_speed = TWO_PI / period
            matched = abs(abs(omega) - target_speed) <= TEMPO_TOL * target_speed
            info.task_reward = 1.0 if matched else 0.0
            info.s_task = float(period)
        return new_state, info

    if spec.name == "swing_mass":
        x, v = state.internal
        torque = float(a[0])
        # damped oscillator, semi-implicit Euler
        v_new = v + SWING_DT * (-1.0 * x - 0.2 * v + 2.0 * torque)
        x_new = x + SWING_DT * v_new
        x_new = float(np.clip(x_new, -10.0, 10.0))
        v_new = float(np.clip(v_new, -10.0, 10.0))
        internal = np.array([x_new, v_new])
        return EnvState(internal.copy(), t + 1, internal), StepInfo(v_x=abs(v_new))

    if spec.name == "plane_ring":
        theta, x, y = state.internal
        omega = float(a[0]) * OMEGA_MAX
        theta_new = (theta + omega) % TWO_PI
        x_new = x + 0.1 * float(a[1])
        y_new = y + 0.1 * float(a[2])
        internal = np.array([theta_new, x_new, y_new])
        obs = np.array([np.cos(theta_new), np.sin(theta_new), x_new, y_new])
        return EnvState(obs, t + 1, internal), StepInfo(v_x=float(a[1]))

    raise ConfigurationError(f"unknown env name: {spec.name}")


def scripted_periodic_action(spec: EnvSpec, L: int) -> np.ndarray:
    """Action giving constant angular velocity pi/L on ring_world, so the
    phase channels repeat exactly every 2L steps."""
    if spec.name not in ("ring_world", "tempo_track", "plane_ring"):
        raise ConfigurationError("scripted periodic policy requires a ring phase")
    if L < 1:
        raise InfeasiblePeriodError(f"L must be >= 1, got {L}")
    omega = np.pi / L
    if omega > OMEGA_MAX + 1e-12:
        raise InfeasiblePeriodError(
            f"period L={L} needs angular velocity {omega:.4f} > max {OMEGA_MAX:.4f}"
        )
    action = np.zeros(spec.act_dim)
    action[0] = omega / OMEGA_MAX
    return action


def scripted_periodic_policy(spec: EnvSpec, state: EnvState, L: int) -> np.ndarray:
    return scripted_periodic_action(spec, L)
