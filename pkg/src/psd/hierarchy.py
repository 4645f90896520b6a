"""High-level period-selection policy trained with clipped-surrogate PPO.

Every H environment steps the high-level policy picks one period from the
trained discrete set; the frozen low-level policy executes it. Advantages
use GAE(lambda=0.95) with per-batch normalization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .nn import (
    AdamState,
    adam_step,
    ConfigurationError,
    MlpSpec,
    NumericError,
    init_mlp,
    mlp_apply,
    mlp_forward,
)
from . import envs


@dataclass
class HighLevelConfig:
    action_space: list
    H: int = 10
    gamma: float = 0.99
    clip: float = 0.2
    lr_actor: float = 3e-4
    lr_critic: float = 1e-3
    episodes_per_epoch: int = 4
    grad_steps: int = 80
    batch: int = 256
    gae_lambda: float = 0.95
    entropy_coef: float = 0.01
    hidden_layers: int = 2
    hidden_units: int = 64

    def __post_init__(self):
        if self.H < 1:
            raise ConfigurationError("H must be >= 1")
        if not self.action_space:
            raise ConfigurationError("action_space must be non-empty")


class HighLevelPolicy:
    """Categorical actor over the period set plus a value critic."""

    def __init__(self, obs_dim: int, cfg: HighLevelConfig,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.n_actions = len(cfg.action_space)
        self.actor_spec = MlpSpec(obs_dim, cfg.hidden_layers, cfg.hidden_units,
                                  self.n_actions)
        self.critic_spec = MlpSpec(obs_dim, cfg.hidden_layers, cfg.hidden_units, 1)
        self.actor = init_mlp(self.actor_spec, rng, prefix="hla/")
        self.critic = init_mlp(self.critic_spec, rng, prefix="hlc/")
        self.actor_opt = AdamState(lr=cfg.lr_actor)
        self.critic_opt = AdamState(lr=cfg.lr_critic)

    def probs(self, obs_h) -> np.ndarray:
        logits = mlp_forward(self.actor_spec, self.actor,
                             np.atleast_2d(obs_h), prefix="hla/")
        shifted = logits - logits.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        p = e / e.sum(axis=1, keepdims=True)
        return p[0] if np.asarray(obs_h).ndim == 1 else p

    def act(self, obs_h, rng: np.random.Generator):
        p = self.probs(obs_h)
        idx = int(rng.choice(self.n_actions, p=p))
        value = float(mlp_forward(self.critic_spec, self.critic,
                                  np.atleast_2d(obs_h), prefix="hlc/")[0, 0])
        return idx, float(np.log(p[idx])), value

    def greedy(self, obs_h) -> int:
        return int(np.argmax(self.probs(obs_h)))


def gae_advantages(rewards, values, gamma: float, lam: float):
    """GAE over one decision sequence; terminal value 0."""
    T = len(rewards)
    adv = np.zeros(T)
    last = 0.0
    for t in reversed(range(T)):
        next_v = values[t + 1] if t + 1 < T else 0.0
        delta = rewards[t] + gamma * next_v - values[t]
        last = delta + gamma * lam * last
        adv[t] = last
    returns = adv + np.asarray(values[:T])
    return adv, returns


def hierarchical_rollout(policy: HighLevelPolicy, low_agent, spec: envs.EnvSpec,
                         cfg: HighLevelConfig, seed: int,
                         explore: bool = True) -> dict:
    """One episode on the downstream env; returns decision-level arrays."""
    rng = np.random.default_rng(seed)
    state = envs.reset(spec, seed)
    obs_hs, idxs, logps, values, rewards, decisions = [], [], [], [], [], []
    t = 0
    while t < spec.episode_length:
        s_task = float(envs.tempo_target_period(t))
        obs_h = np.concatenate([[s_task], state.observation])
        if explore:
            idx, logp, value = policy.act(obs_h, rng)
        else:
            idx, logp, value = policy.greedy(obs_h), 0.0, 0.0
        L = cfg.action_space[idx]
        block_reward = 0.0
        for _ in range(cfg.H):
            if t >= spec.episode_length:
                break
            a = low_agent.sample_action(state.observation, L, mode="mean")
            state, info = envs.step(spec, state, a)
            block_reward += info.task_reward
            t += 1
        obs_hs.append(obs_h)
        idxs.append(idx)
        logps.append(logp)
        values.append(value)
        rewards.append(block_reward)
        decisions.append((t - cfg.H, L, s_task))
    return {
        "obs_h": np.array(obs_hs),
        "action_idx": np.array(idxs, dtype=np.int64),
        "logp_old": np.array(logps),
        "values": np.array(values),
        "rewards": np.array(rewards),
        "decisions": decisions,
        "task_return": float(np.sum(rewards)),
    }


def ppo_update(policy: HighLevelPolicy, rollouts: list[dict],
               cfg: HighLevelConfig, rng: np.random.Generator) -> dict:
    """Clipped-surrogate update from collected decision sequences."""
    obs = np.vstack([r["obs_h"] for r in rollouts])
    idxs = np.concatenate([r["action_idx"] for r in rollouts])
    logp_old = np.concatenate([r["logp_old"] for r in rollouts])
    advs, rets = [], []
    for r in rollouts:
        a, ret = gae_advantages(r["rewards"], r["values"], cfg.gamma,
                                cfg.gae_lambda)
        advs.append(a)
        rets.append(ret)
    adv = np.concatenate(advs)
    ret = np.concatenate(rets)
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    n = obs.shape[0]
    onehot = np.zeros((n, policy.n_actions))
    onehot[np.arange(n), idxs] = 1.0

    actor_losses, critic_losses = [], []
    for _ in range(cfg.grad_steps):
        sel = rng.integers(0, n, size=min(cfg.batch, n))
        ob = obs[sel]
        oh = onehot[sel]
        ad = adv[sel]
        lo = logp_old[sel]

        a_tensors = policy.actor.as_tensors()
        logits = mlp_apply(policy.actor_spec, a_tensors, Tensor(ob), prefix="hla/")
        shift = logits.data.max(axis=1, keepdims=True)
        lse = ((logits - Tensor(shift)).exp().sum(axis=1, keepdims=True)).log() \
            + Tensor(shift)
        logp_all = logits - lse
        logp_new = (logp_all * Tensor(oh)).sum(axis=1)
        ratio = (logp_new - Tensor(lo)).exp()
        clipped = ratio.clip(1.0 - cfg.clip, 1.0 + cfg.clip)
        surr_u = ratio * Tensor(ad)
        surr_c = clipped * Tensor(ad)
        pick = (surr_u.data <= surr_c.data).astype(np.float64)
        surr = surr_u * Tensor(pick) + surr_c * Tensor(1.0 - pick)
        entropy = -(logp_all * logp_all.exp()).sum(axis=1).mean()
        actor_loss = -surr.mean() - cfg.entropy_coef * entropy
        if not np.isfinite(actor_loss.data):
            raise NumericError("non-finite PPO actor loss")
        actor_loss.backward()
        grads = {k: (t.grad if t.grad is not None else np.zeros_like(t.data))
                 for k, t in a_tensors.items()}
        adam_step(policy.actor_opt, policy.actor, grads)

        c_tensors = policy.critic.as_tensors()
        v = mlp_apply(policy.critic_spec, c_tensors, Tensor(ob), prefix="hlc/")
        critic_loss = ((v.cols(0, 1).sum(axis=1) - Tensor(ret[sel])) ** 2).mean()
        if not np.isfinite(critic_loss.data):
            raise NumericError("non-finite PPO critic loss")
        critic_loss.backward()
        cgrads = {k: (t.grad if t.grad is not None else np.zeros_like(t.data))
                  for k, t in c_tensors.items()}
        adam_step(policy.critic_opt, policy.critic, cgrads)

        actor_losses.append(float(actor_loss.data))
        critic_losses.append(float(critic_loss.data))
    return {
        "actor_loss": float(np.mean(actor_losses)),
        "critic_loss": float(np.mean(critic_losses)),
    }
