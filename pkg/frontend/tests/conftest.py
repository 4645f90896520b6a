"""Fixture artifacts mirroring the files the training CLI writes."""

import json

import numpy as np
import pytest


@pytest.fixture
def spectrum_csv(tmp_path):
    path = tmp_path / "spectrum.csv"
    lines = ["skill_id,L,freq,amp,rank"]
    for i, L in enumerate((5, 10, 15, 20)):
        for rank in (1, 2):
            lines.append(
                f"skill_{i:02d}_L{L},{L},{1.0 / (2 * L * rank)},"
                f"{1.0 / rank},{rank}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def pca_csv(tmp_path):
    path = tmp_path / "latent_pca.csv"
    rng = np.random.default_rng(0)
    lines = ["t,L,pc1,pc2"]
    for L in (5, 10):
        theta = np.linspace(0, 2 * np.pi, 40)
        for t, th in enumerate(theta):
            lines.append(f"{t},{L},{float(L * np.cos(th))!r},{float(L * np.sin(th))!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


@pytest.fixture
def metrics_jsonl(tmp_path):
    path = tmp_path / "metrics.jsonl"
    rows = []
    for epoch in range(10):
        rows.append(json.dumps({
            "epoch": epoch,
            "L_min": 10 - epoch // 3,
            "L_max": 10 + epoch // 2,
            "mean_return_psd": 50.0 + 10 * epoch,
            "encoder_loss": -0.1 * epoch if epoch else None,
            "critic_loss": 1.0 / (epoch + 1),
            "alpha": 0.1,
        }))
    path.write_text("\n".join(rows) + "\n")
    return path


@pytest.fixture
def trajectory_csv(tmp_path):
    path = tmp_path / "skill_00_L10.csv"
    lines = ["t,L,obs_0,obs_1,act_0,r_psd,r_ext"]
    T = 40
    for t in range(T):
        th = 2 * np.pi * t / 20
        lines.append(f"{t},10,{float(np.cos(th))!r},{float(np.sin(th))!r},0.4,0.9,0.1")
    lines.append(f"{T},10,{1.0!r},{0.0!r},,,")
    path.write_text("\n".join(lines) + "\n")
    return path
