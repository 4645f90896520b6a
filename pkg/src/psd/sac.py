"""Period-conditioned soft actor-critic with twin critics and auto-tuned entropy.

The policy and critics receive the sinusoidal period embedding (and the
skill vector, when direction skills are enabled) alongside the observation.
Intrinsic rewards are recomputed at update time from the live encoder, so
the buffer only stores raw ingredients (states, actions, v_x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, concat_cols
from .buffer import EpisodeBuffer
from .encoder import embed_period_batch
from .nn import (
    AdamState,
    ConfigurationError,
    MlpSpec,
    NumericError,
    ParamSet,
    adam_step,
    init_mlp,
    mlp_apply,
    mlp_forward,
    polyak_update,
)
from .trajectory import SkillTrajectory
from . import envs

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
SQUASH_EPS = 1e-6


@dataclass
class SacConfig:
    gamma: float = 0.99
    lr: float = 1e-4
    tau: float = 0.995
    batch: int = 256
    episodes_per_epoch: int = 8
    grad_steps_per_epoch: int = 64
    auto_entropy: bool = True
    init_alpha: float = 0.1
    hidden_layers: int = 2
    hidden_units: int = 256

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ConfigurationError("gamma must lie in (0, 1)")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigurationError("tau must lie in (0, 1]")


class SacAgent:
    """Policy, twin critics, their targets, and optimizer state."""

    def __init__(self, obs_dim: int, act_dim: int, cfg: SacConfig,
                 rng: np.random.Generator, embed_dim: int = 8, skill_dim: int = 0):
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.embed_dim = embed_dim
        self.skill_dim = skill_dim
        cond_dim = obs_dim + embed_dim + skill_dim
        self.pi_spec = MlpSpec(cond_dim, cfg.hidden_layers, cfg.hidden_units,
                               2 * act_dim)
        self.q_spec = MlpSpec(cond_dim + act_dim, cfg.hidden_layers,
                              cfg.hidden_units, 1)
        self.params = ParamSet()
        for name, arr in init_mlp(self.pi_spec, rng, prefix="pi/").items():
            self.params.add(name, arr)
        for name, arr in init_mlp(self.q_spec, rng, prefix="q1/").items():
            self.params.add(name, arr)
        for name, arr in init_mlp(self.q_spec, rng, prefix="q2/").items():
            self.params.add(name, arr)
        self.target_params = ParamSet()
        for name in self.params.names():
            if name.startswith("q"):
                self.target_params.add(name, self.params[name].copy())
        self.log_alpha = np.log(cfg.init_alpha)
        self.target_entropy = -float(act_dim)
        self.pi_opt = AdamState(lr=cfg.lr)
        self.q_opt = AdamState(lr=cfg.lr)
        self.alpha_opt = AdamState(lr=cfg.lr)

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))

    # -- conditioning ---------------------------------------------------

    def _cond(self, obs, L, z=None) -> np.ndarray:
        obs = np.atleast_2d(np.asarray(obs, dtype=np.float64))
        n = obs.shape[0]
        Ls = np.broadcast_to(np.asarray(L), (n,))
        emb = embed_period_batch(Ls, self.embed_dim)
        parts = [obs, emb]
        if self.skill_dim:
            if z is None:
                raise ConfigurationError("agent expects a skill vector")
            z = np.atleast_2d(np.asarray(z, dtype=np.float64))
            parts.append(np.broadcast_to(z, (n, self.skill_dim)))
        return np.hstack(parts)

    # -- acting -----------------------------------------------------------

    def sample_action(self, obs, L, mode: str = "stochastic",
                      rng: np.random.Generator | None = None, z=None) -> np.ndarray:
        out = mlp_forward(self.pi_spec, self.params, self._cond(obs, L, z),
                          prefix="pi/")
        mu = out[:, : self.act_dim]
        if mode == "mean":
            return np.tanh(mu[0])
        if rng is None:
            raise ConfigurationError("stochastic sampling needs an RNG")
        log_std = np.clip(out[:, self.act_dim:], LOG_STD_MIN, LOG_STD_MAX)
        noise = rng.standard_normal(mu.shape)
        return np.tanh(mu[0] + np.exp(log_std[0]) * noise[0])

    def _policy_np(self, cond: np.ndarray, noise: np.ndarray):
        """Squashed sample and log-prob without building a graph."""
        out = mlp_forward(self.pi_spec, self.params, cond, prefix="pi/")
        mu = out[:, : self.act_dim]
        log_std = np.clip(out[:, self.act_dim:], LOG_STD_MIN, LOG_STD_MAX)
        raw = mu + np.exp(log_std) * noise
        a = np.tanh(raw)
        logp = (-0.5 * noise**2 - log_std - 0.5 * np.log(2 * np.pi)).sum(axis=1)
        logp -= np.log(1.0 - a**2 + SQUASH_EPS).sum(axis=1)
        return a, logp

    # -- updates ---------------------------------------------------------

    def _q_apply(self, tensors, cond_t: Tensor, act_t: Tensor, prefix: str):
        return mlp_apply(self.q_spec, tensors, concat_cols([cond_t, act_t]),
                         prefix=prefix)

    def update(self, batch: dict, rewards: np.ndarray,
               rng: np.random.Generator) -> dict:
        """One gradient step on critics, actor, and entropy coefficient."""
        cfg = self.cfg
        cond = self._cond(batch["s"], batch["L"], batch.get("z"))
        cond_next = self._cond(batch["s_next"], batch["L"], batch.get("z"))
        n = cond.shape[0]
        done = batch["done"]

        # critic target (no gradients)
        noise = rng.standard_normal((n, self.act_dim))
        a_next, logp_next = self._policy_np(cond_next, noise)
        qin_next = np.hstack([cond_next, a_next])
        q1_t = mlp_forward(self.q_spec, self.target_params, qin_next, prefix="q1/")
        q2_t = mlp_forward(self.q_spec, self.target_params, qin_next, prefix="q2/")
        q_min = np.minimum(q1_t[:, 0], q2_t[:, 0])
        target = rewards + cfg.gamma * (1.0 - done) * (q_min - self.alpha * logp_next)

        # critic update
        q_params = ParamSet()
        for name in self.params.names():
            if name.startswith("q"):
                q_params.add(name, self.params[name])
        q_tensors = q_params.as_tensors()
        cond_t = Tensor(cond)
        act_t = Tensor(batch["a"])
        tgt = Tensor(target[:, None])
        q1 = self._q_apply(q_tensors, cond_t, act_t, "q1/")
        q2 = self._q_apply(q_tensors, cond_t, act_t, "q2/")
        critic_loss = ((q1 - tgt) ** 2).mean() + ((q2 - tgt) ** 2).mean()
        if not np.isfinite(critic_loss.data):
            raise NumericError("non-finite critic loss")
        critic_loss.backward()
        q_grads = {name: (t.grad if t.grad is not None else np.zeros_like(t.data))
                   for name, t in q_tensors.items()}
        adam_step(self.q_opt, q_params, q_grads)
        for name in q_params.names():
            self.params[name] = q_params[name]

        # actor update (critic weights frozen as constants)
        pi_params = ParamSet()
        for name in self.params.names():
            if name.startswith("pi/"):
                pi_params.add(name, self.params[name])
        pi_tensors = pi_params.as_tensors()
        q_consts = {name: Tensor(self.params[name])
                    for name in self.params.names() if name.startswith("q")}
        noise_pi = rng.standard_normal((n, self.act_dim))
        out = mlp_apply(self.pi_spec, pi_tensors, Tensor(cond), prefix="pi/")
        mu = out.cols(0, self.act_dim)
        log_std = out.cols(self.act_dim, 2 * self.act_dim).clip(LOG_STD_MIN,
                                                                LOG_STD_MAX)
        raw = mu + log_std.exp() * Tensor(noise_pi)
        a_pi = raw.tanh()
        logp = (Tensor(-0.5 * noise_pi**2 - 0.5 * np.log(2 * np.pi)) - log_std).sum(
            axis=1
        ) - ((1.0 - a_pi * a_pi + SQUASH_EPS).log()).sum(axis=1)
        q1_pi = self._q_apply(q_consts, Tensor(cond), a_pi, "q1/")
        q2_pi = self._q_apply(q_consts, Tensor(cond), a_pi, "q2/")
        # elementwise min with gradient routed to the smaller critic
        pick1 = (q1_pi.data[:, 0] <= q2_pi.data[:, 0]).astype(np.float64)
        q_pi_min = q1_pi.cols(0, 1).sum(axis=1) * Tensor(pick1) + q2_pi.cols(
            0, 1
        ).sum(axis=1) * Tensor(1.0 - pick1)
        actor_loss = (Tensor(self.alpha) * logp - q_pi_min).mean()
        if not np.isfinite(actor_loss.data):
            raise NumericError("non-finite actor loss")
        actor_loss.backward()
        pi_grads = {name: (t.grad if t.grad is not None else np.zeros_like(t.data))
                    for name, t in pi_tensors.items()}
        adam_step(self.pi_opt, pi_params, pi_grads)
        for name in pi_params.names():
            self.params[name] = pi_params[name]

        # entropy coefficient (alpha parameterized through exp, hence > 0)
        if cfg.auto_entropy:
            logp_val = logp.data
            alpha_grad = -self.alpha * float(
                np.mean(logp_val + self.target_entropy)
            )
            holder = ParamSet()
            holder.add("log_alpha", np.array([self.log_alpha]))
            adam_step(self.alpha_opt, holder, {"log_alpha": np.array([alpha_grad])})
            self.log_alpha = float(holder["log_alpha"][0])

        # target smoothing
        online_q = ParamSet()
        for name in self.target_params.names():
            online_q.add(name, self.params[name])
        polyak_update(self.target_params, online_q, cfg.tau)

        return {
            "critic_loss": float(critic_loss.data),
            "actor_loss": float(actor_loss.data),
            "alpha": self.alpha,
            "mean_q": float(q_min.mean()),
        }


def rollout_episode(agent: SacAgent | None, spec: envs.EnvSpec, L: int,
                    seed: int, mode: str = "stochastic", z=None,
                    action_fn=None) -> SkillTrajectory:
    """Roll one full episode with constant L; deterministic given seeds."""
    rng = np.random.default_rng(seed)
    state = envs.reset(spec, seed)
    states, actions, v_xs, tasks = [], [], [], []
    for _ in range(spec.episode_length):
        if action_fn is not None:
            a = action_fn(state)
        else:
            a = agent.sample_action(state.observation, L, mode=mode, rng=rng, z=z)
        states.append(state.observation)
        actions.append(np.atleast_1d(a))
        state, info = envs.step(spec, state, a)
        v_xs.append(info.v_x)
        tasks.append(info.task_reward)
    return SkillTrajectory(
        L=L,
        states=np.array(states),
        actions=np.array(actions),
        v_x=np.array(v_xs),
        final_state=state.observation.copy(),
        z=None if z is None else np.asarray(z, dtype=np.float64),
        task_rewards=np.array(tasks),
    )


def store_trajectory(buffer: EpisodeBuffer, traj: SkillTrajectory):
    return buffer.push_episode(traj.all_states(), traj.actions, traj.v_x,
                               traj.L, z=traj.z)
