"""Training loop plumbing: epoch metrics, curriculum hooks, determinism."""

import json

import numpy as np
import pytest

from psd.config import config_from_dict
from psd.train import (
    compute_rewards,
    dump_final_trajectories,
    init_train_state,
    run_epoch,
    write_metrics_line,
)
from psd.trajectory import read_trajectory_csv


def tiny_config(**kw):
    base = {
        "encoder": {"hidden_units": 16, "batch": 64},
        "agent": {"hidden_units": 16, "batch": 32, "grad_steps_per_epoch": 2,
                  "episodes_per_epoch": 2},
        "env": {"name": "ring_world", "episode_length": 40},
        "bounds": {"L_min": 5, "L_max": 10},
        "encoder_steps_per_epoch": 2,
    }
    base.update(kw)
    return config_from_dict(base)


def test_epoch_metrics_have_the_logged_fields():
    state = init_train_state(tiny_config())
    m = run_epoch(state)
    for key in ("epoch", "L_min", "L_max", "mean_return_psd",
                "mean_return_ext", "encoder_loss", "actor_loss",
                "critic_loss", "alpha"):
        assert key in m, key
    assert m["epoch"] == 0
    assert state.epoch == 1
    assert state.episodes == 2
    assert len(state.buffer.episodes) == 2


def test_runs_are_bit_reproducible():
    logs = []
    for _ in range(2):
        state = init_train_state(tiny_config(seed=3))
        logs.append([run_epoch(state) for _ in range(3)])
    assert logs[0] == logs[1]


def test_different_seeds_diverge():
    a = run_epoch(init_train_state(tiny_config(seed=0)))
    b = run_epoch(init_train_state(tiny_config(seed=1)))
    assert a["mean_return_psd"] != b["mean_return_psd"]


def test_curriculum_eval_fires_on_interval():
    cfg = tiny_config(bounds={"L_min": 10, "L_max": 10, "adaptive": True,
                              "interval_episodes": 4, "eval_episodes": 1})
    state = init_train_state(cfg)
    m1 = run_epoch(state)  # 2 episodes, below the interval
    assert "bound_eval" not in m1
    m2 = run_epoch(state)  # now 4 episodes since last eval
    m3 = run_epoch(state)
    assert "bound_eval" in m3
    assert state.bounds.history
    assert state.episodes_since_eval < 4


def test_fixed_bounds_never_evaluate():
    state = init_train_state(tiny_config())
    for _ in range(3):
        m = run_epoch(state)
        assert "bound_eval" not in m
    assert state.bounds.history == []


def test_metra_config_adds_skill_fields():
    cfg = tiny_config(metra={"skill_dim": 2, "hidden_units": 16},
                      env={"name": "plane_ring", "episode_length": 40})
    state = init_train_state(cfg)
    m = run_epoch(state)
    assert "lambda_m" in m and "metra_reward_mean" in m
    assert state.buffer.episodes[0].z is not None


def test_compute_rewards_matches_manual_combination():
    state = init_train_state(tiny_config())
    run_epoch(state)
    batch = state.buffer.sample_sac_batch(np.random.default_rng(0), 16)
    r = compute_rewards(state, batch)
    assert r.shape == (16,)
    assert np.all((r > 0) & (r <= 1))  # intrinsic-only config


def test_write_metrics_line_appends_jsonl(tmp_path):
    path = tmp_path / "metrics.jsonl"
    write_metrics_line(path, {"epoch": 0, "x": 1.5})
    write_metrics_line(path, {"epoch": 1, "x": None})
    rows = [json.loads(ln) for ln in path.read_text().splitlines()]
    assert rows == [{"epoch": 0, "x": 1.5}, {"epoch": 1, "x": None}]


def test_dump_final_trajectories_round_trips(tmp_path):
    state = init_train_state(tiny_config())
    run_epoch(state)
    files = dump_final_trajectories(state, tmp_path / "trajs", n_skills=4)
    assert len(files) == 4
    Ls = []
    for f in files:
        traj = read_trajectory_csv(f)
        assert traj.states.shape == (40, 7)
        Ls.append(traj.L)
    assert min(Ls) == 5 and max(Ls) == 10
