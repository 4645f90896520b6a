"""Command-line interface: exit codes, artifacts, determinism, resume."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from psd.cli import main
from psd.trajectory import read_trajectory_csv

TINY = {
    "epochs": 2,
    "encoder": {"hidden_units": 16, "batch": 64},
    "agent": {"hidden_units": 16, "batch": 32, "grad_steps_per_epoch": 2,
              "episodes_per_epoch": 2},
    "env": {"name": "ring_world", "episode_length": 40},
    "bounds": {"L_min": 5, "L_max": 10},
    "encoder_steps_per_epoch": 2,
    "checkpoint_every": 1,
}


def write_config(tmp_path, **overrides):
    cfg = dict(TINY)
    cfg.update(overrides)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg))
    return path


def run_train(tmp_path, out_name="run", **overrides):
    cfg = write_config(tmp_path, **overrides)
    out = tmp_path / out_name
    rc = main(["train", "--config", str(cfg), "--out", str(out)])
    assert rc == 0
    return out


def test_bad_config_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"unknown_key": 1}))
    assert main(["train", "--config", str(bad)]) == 2
    missing = tmp_path / "missing.json"
    assert main(["train", "--config", str(missing)]) == 2


def test_train_writes_metrics_checkpoints_and_trajectories(tmp_path):
    out = run_train(tmp_path)
    rows = [json.loads(ln)
            for ln in (out / "metrics.jsonl").read_text().splitlines()]
    assert [r["epoch"] for r in rows] == [0, 1]
    assert (out / "final.bin").exists()
    # one dump per distinct L in [5, 10]
    trajs = sorted((out / "trajectories").glob("*.csv"))
    assert len(trajs) == 6
    read_trajectory_csv(trajs[0])  # parses cleanly


def test_two_runs_are_bit_identical(tmp_path):
    out1 = run_train(tmp_path, "a")
    out2 = run_train(tmp_path, "b")
    assert (out1 / "metrics.jsonl").read_text() == \
        (out2 / "metrics.jsonl").read_text()
    assert (out1 / "final.bin").read_bytes() == (out2 / "final.bin").read_bytes()


def test_resume_matches_a_continuous_run(tmp_path):
    full = run_train(tmp_path, "full", epochs=4)
    half = run_train(tmp_path, "half", epochs=2)
    rc = main(["train", "--resume", str(half / "ckpt_000002.bin"),
               "--epochs", "4", "--out", str(half)])
    assert rc == 0
    full_rows = (tmp_path / "full" / "metrics.jsonl").read_text().splitlines()
    half_rows = (half / "metrics.jsonl").read_text().splitlines()
    assert half_rows == full_rows
    assert (full / "final.bin").read_bytes() == (half / "final.bin").read_bytes()


def test_psd_out_env_var_overrides_output_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("PSD_OUT", str(tmp_path / "redirect"))
    cfg = write_config(tmp_path)
    rc = main(["train", "--config", str(cfg), "--out", "run"])
    assert rc == 0
    assert (tmp_path / "redirect" / "run" / "final.bin").exists()


def test_eval_writes_a_trajectory(tmp_path):
    out = run_train(tmp_path)
    csv_path = tmp_path / "eval.csv"
    rc = main(["eval", "--ckpt", str(out / "final.bin"), "--L", "8",
               "--out", str(csv_path)])
    assert rc == 0
    traj = read_trajectory_csv(csv_path)
    assert traj.L == 8
    assert traj.states.shape == (40, 7)


def test_analyze_spectrum_and_pca_emit_csv(tmp_path):
    out = run_train(tmp_path)
    spec_csv = tmp_path / "spectrum.csv"
    rc = main(["analyze", "spectrum", str(out / "trajectories"),
               "--out", str(spec_csv)])
    assert rc == 0
    header = spec_csv.read_text().splitlines()[0]
    assert header == "skill_id,L,freq,amp,rank"

    pca_csv = tmp_path / "pca.csv"
    rc = main(["analyze", "pca", str(out / "final.bin"),
               str(out / "trajectories"), "--out", str(pca_csv)])
    assert rc == 0
    assert pca_csv.read_text().splitlines()[0] == "t,L,pc1,pc2"


def test_analyze_geometry_emits_json(tmp_path):
    out = run_train(tmp_path)
    geo = tmp_path / "geometry.json"
    rc = main(["analyze", "geometry", str(out / "final.bin"),
               str(out / "trajectories"), "--L", "5", "--out", str(geo)])
    assert rc == 0
    rep = json.loads(geo.read_text())
    assert rep["L"] == 5
    assert "rel_err_onestep" in rep


def test_analyze_period_prints_an_integer(tmp_path, capsys):
    # a scripted trajectory CSV with known period 2L
    from psd import envs
    from psd.sac import rollout_episode
    from psd.trajectory import write_trajectory_csv

    spec = envs.make_spec("ring_world")
    L = 10
    traj = rollout_episode(
        None, spec, L, seed=0,
        action_fn=lambda st: envs.scripted_periodic_policy(spec, st, L))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(path, traj)
    rc = main(["analyze", "period", str(path)])
    assert rc == 0
    assert int(capsys.readouterr().out.strip()) == 2 * L


def test_verify_invariants_exits_zero(tmp_path, capsys):
    rc = main(["verify", "invariants", "--out", str(tmp_path / "inv.json")])
    assert rc == 0
    report = json.loads((tmp_path / "inv.json").read_text())
    assert report["passed"]


def test_verify_theorem_small_case():
    rc = main(["verify", "theorem", "--L", "2..2", "--d", "2"])
    assert rc == 0


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "psd.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "train" in proc.stdout
