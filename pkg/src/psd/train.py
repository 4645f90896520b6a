"""Training orchestration: rollout collection, encoder/agent updates,
curriculum evaluation, and per-epoch metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .buffer import EpisodeBuffer, InsufficientDataError
from .config import RunConfig
from .encoder import PsdEncoder, train_encoder_step
from .metra import MetraEncoder, metra_update, r_metra, sample_skill
from .reward import combine, delta, r_ext, r_psd
from .sac import SacAgent, rollout_episode, store_trajectory
from .sampling import SamplingBounds, evaluate_bound, update_bounds
from . import envs


@dataclass
class TrainState:
    cfg: RunConfig
    spec: envs.EnvSpec
    encoder: PsdEncoder
    agent: SacAgent
    buffer: EpisodeBuffer
    bounds: SamplingBounds
    rng: np.random.Generator
    metra_encoder: MetraEncoder | None = None
    epoch: int = 0
    episodes: int = 0
    episodes_since_eval: int = 0
    metrics_log: list = field(default_factory=list)


def init_train_state(cfg: RunConfig) -> TrainState:
    spec = envs.make_spec(cfg.env.name, cfg.env.episode_length)
    rng = np.random.default_rng(cfg.seed)
    skill_dim = cfg.metra.skill_dim if cfg.metra else 0
    encoder = PsdEncoder(spec.obs_dim, cfg.encoder, rng, skill_dim=skill_dim)
    agent = SacAgent(spec.obs_dim, spec.act_dim, cfg.agent, rng,
                     embed_dim=cfg.encoder.D, skill_dim=skill_dim)
    metra_encoder = None
    if cfg.metra:
        metra_encoder = MetraEncoder(spec.obs_dim, cfg.metra, rng,
                                     embed_dim=cfg.encoder.D)
    return TrainState(
        cfg=cfg, spec=spec, encoder=encoder, agent=agent,
        buffer=EpisodeBuffer(capacity=500_000), bounds=cfg.bounds.make(),
        rng=rng, metra_encoder=metra_encoder,
    )


def compute_rewards(state: TrainState, batch: dict) -> np.ndarray:
    """Per-transition reward from the live encoder(s)."""
    cfg = state.cfg
    z = batch.get("z")
    devs = delta(state.encoder, batch["s"], batch["s_next"], batch["L"], z)
    psd = r_psd(devs, cfg.reward.kappa)
    ext = r_ext(batch["v_x"], cfg.reward.v_star) if cfg.reward.use_ext else None
    metra = None
    if state.metra_encoder is not None:
        metra = r_metra(state.metra_encoder, batch["s"], batch["s_next"],
                        z, batch["L"])
    return combine(psd, ext, metra, cfg.reward)


def _trajectory_rewards(state: TrainState, traj) -> tuple[np.ndarray, np.ndarray]:
    s_next = np.vstack([traj.states[1:], traj.final_state[None, :]])
    Ls = np.full(len(traj), traj.L)
    devs = delta(state.encoder, traj.states, s_next, Ls, traj.z)
    return r_psd(devs, state.cfg.reward.kappa), r_ext(traj.v_x,
                                                      state.cfg.reward.v_star)


def run_epoch(state: TrainState) -> dict:
    cfg = state.cfg
    metrics = {"epoch": state.epoch}

    # curriculum evaluation
    if cfg.bounds.adaptive and state.episodes_since_eval >= \
            state.bounds.interval_episodes and state.episodes > 0:
        r_min = evaluate_bound(state.agent, state.encoder, state.spec,
                               state.bounds.L_min, state.bounds.eval_episodes,
                               cfg.reward.kappa)
        r_max = evaluate_bound(state.agent, state.encoder, state.spec,
                               state.bounds.L_max, state.bounds.eval_episodes,
                               cfg.reward.kappa)
        update_bounds(state.bounds, r_min, r_max, state.spec.episode_length)
        state.bounds.history.append(
            (state.episodes, state.bounds.L_min, state.bounds.L_max, r_min, r_max)
        )
        state.episodes_since_eval = 0
        metrics["bound_eval"] = {"r_min": r_min, "r_max": r_max}
    metrics["L_min"] = state.bounds.L_min
    metrics["L_max"] = state.bounds.L_max

    # rollout collection
    values = state.bounds.training_values(cfg.bounds.n_values)
    psd_returns, ext_returns = [], []
    for _ in range(cfg.agent.episodes_per_epoch):
        L = int(values[state.rng.integers(len(values))])
        z = None
        if state.metra_encoder is not None:
            z = sample_skill(cfg.metra, state.rng).z
        seed = int(state.rng.integers(2**31 - 1))
        traj = rollout_episode(state.agent, state.spec, L, seed,
                               mode="stochastic", z=z)
        store_trajectory(state.buffer, traj)
        psd_r, ext_r = _trajectory_rewards(state, traj)
        psd_returns.append(float(psd_r.sum()))
        ext_returns.append(float(ext_r.sum()))
        state.episodes += 1
        state.episodes_since_eval += 1
    metrics["mean_return_psd"] = float(np.mean(psd_returns))
    metrics["mean_return_ext"] = float(np.mean(ext_returns))

    # encoder updates
    enc_losses = []
    for _ in range(cfg.encoder_steps_per_epoch):
        try:
            batch = state.buffer.sample_tuple_batch(state.rng, cfg.encoder.batch)
        except InsufficientDataError:
            break
        m = train_encoder_step(state.encoder, batch)
        enc_losses.append(m["loss"])
    metrics["encoder_loss"] = float(np.mean(enc_losses)) if enc_losses else None

    # direction-skill encoder updates
    if state.metra_encoder is not None:
        metra_ms = []
        for _ in range(cfg.encoder_steps_per_epoch):
            batch = state.buffer.sample_sac_batch(state.rng, cfg.agent.batch)
            metra_ms.append(metra_update(
                state.metra_encoder,
                (batch["z"], batch["L"], batch["s"], batch["s_next"]),
            ))
        metrics["lambda_m"] = metra_ms[-1]["lambda_m"]
        metrics["metra_reward_mean"] = float(
            np.mean([m["metra_reward_mean"] for m in metra_ms])
        )

    # agent updates with rewards recomputed from the live encoder
    actor_losses, critic_losses = [], []
    for _ in range(cfg.agent.grad_steps_per_epoch):
        batch = state.buffer.sample_sac_batch(state.rng, cfg.agent.batch)
        rewards = compute_rewards(state, batch)
        m = state.agent.update(batch, rewards, state.rng)
        actor_losses.append(m["actor_loss"])
        critic_losses.append(m["critic_loss"])
    metrics["actor_loss"] = float(np.mean(actor_losses))
    metrics["critic_loss"] = float(np.mean(critic_losses))
    metrics["alpha"] = state.agent.alpha

    state.epoch += 1
    state.metrics_log.append(metrics)
    return metrics


def write_metrics_line(path, metrics: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(metrics) + "\n")


def dump_final_trajectories(state: TrainState, out_dir, n_skills: int = 16) -> list:
    """Roll out and dump evenly spaced (L[, z]) skills with the greedy policy."""
    from .trajectory import write_trajectory_csv

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    Ls = np.unique(np.round(np.linspace(state.bounds.L_min, state.bounds.L_max,
                                        n_skills)).astype(int))
    paths = []
    rng = np.random.default_rng(state.cfg.seed + 999)
    for i, L in enumerate(Ls):
        z = None
        if state.metra_encoder is not None:
            z = sample_skill(state.cfg.metra, rng).z
        traj = rollout_episode(state.agent, state.spec, int(L),
                               seed=777_000 + i, mode="mean", z=z)
        traj.r_psd, traj.r_ext = _trajectory_rewards(state, traj)
        p = out_dir / f"skill_{i:02d}_L{L}.csv"
        write_trajectory_csv(p, traj)
        paths.append(p)
    return paths
