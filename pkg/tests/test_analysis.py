"""Spectrum, autocorrelation period, PCA, geometry report, and the 2L-gon
optimality oracle."""

import numpy as np
import pytest

from psd import envs
from psd.analysis import (
    AperiodicSignalError,
    DegenerateDataError,
    Pca,
    autocorr_period,
    geometry_report,
    normalize_and_project,
    parseval_gap,
    random_rollout_stats,
    spectrum,
    theorem_oracle,
)
from psd.buffer import EpisodeBuffer
from psd.encoder import PsdEncoder, PsdEncoderConfig, optimal_chord
from psd.sac import rollout_episode, store_trajectory
from psd.trajectory import SkillTrajectory


def test_spectrum_recovers_a_pure_tone():
    n = 256
    t = np.arange(n)
    x = 3.0 * np.sin(2 * np.pi * t / 16.0) + 5.0  # offset is removed as DC
    sp = spectrum(x)
    freq, amp = sp.top_k[0]
    assert freq == pytest.approx(1.0 / 16.0)
    assert amp == pytest.approx(3.0, abs=1e-9)


def test_spectrum_ranks_two_tones():
    n = 512
    t = np.arange(n)
    x = 1.0 * np.sin(2 * np.pi * t / 8.0) + 0.5 * np.sin(2 * np.pi * t / 32.0)
    sp = spectrum(x, k=2)
    assert sp.top_k[0][0] == pytest.approx(1.0 / 8.0)
    assert sp.top_k[1][0] == pytest.approx(1.0 / 32.0)


def test_parseval_identity_holds():
    x = np.random.default_rng(0).standard_normal(300)
    assert parseval_gap(x) < 1e-9


def test_autocorr_period_of_a_sine():
    t = np.arange(400)
    assert autocorr_period(np.sin(2 * np.pi * t / 20.0)) == 20
    assert autocorr_period(np.cos(2 * np.pi * t / 7.0)) == 7


def test_autocorr_rejects_aperiodic_series():
    with pytest.raises(AperiodicSignalError):
        autocorr_period(np.ones(100))
    with pytest.raises(AperiodicSignalError):
        autocorr_period(np.random.default_rng(1).standard_normal(200))


def test_pca_finds_the_dominant_direction():
    rng = np.random.default_rng(2)
    # points stretched 10x along (1, 1)/sqrt(2)
    raw = rng.standard_normal((500, 2)) * [10.0, 0.1]
    rot = np.array([[1, 1], [-1, 1]]) / np.sqrt(2)
    X = raw @ rot
    pca = Pca(X)
    lead = pca.components[:, 0] if pca.components.shape == (2, 2) else None
    proj = pca.project(X, k=2)
    assert proj.shape == (500, 2)
    assert proj[:, 0].std() > 20 * proj[:, 1].std()
    # sign convention: the largest-magnitude loading is positive
    assert np.max(np.abs(pca.project(np.eye(2), k=1))) > 0


def test_normalize_and_project_rejects_constant_data():
    traj = SkillTrajectory(
        L=5, states=np.ones((20, 3)), actions=np.zeros((20, 1)),
        v_x=np.zeros(20), final_state=np.ones(3))
    stats = (np.ones(3), np.zeros(3))
    with pytest.raises(DegenerateDataError):
        normalize_and_project([traj], stats)


def test_random_rollout_stats_shapes():
    spec = envs.make_spec("ring_world")
    mean, std = random_rollout_stats(spec, n_episodes=3, seed=0)
    assert mean.shape == (7,) and std.shape == (7,)
    assert np.all(std >= 0)


def test_geometry_report_on_scripted_data():
    spec = envs.make_spec("ring_world")
    rng = np.random.default_rng(0)
    enc = PsdEncoder(7, PsdEncoderConfig(hidden_units=64, lr=1e-3), rng)
    buf = EpisodeBuffer()
    L = 10
    for i in range(4):
        traj = rollout_episode(
            None, spec, L, seed=i,
            action_fn=lambda st: envs.scripted_periodic_policy(spec, st, L))
        store_trajectory(buf, traj)
    rep = geometry_report(enc, buf, L, n_samples=500)
    assert rep.L == L
    assert rep.onestep_mean > 0
    # relative errors are reported in percent
    assert rep.rel_err_onestep == pytest.approx(
        abs(rep.onestep_mean - optimal_chord(L)) / optimal_chord(L) * 100.0)
    assert rep.rel_err_Lstep == pytest.approx(
        abs(rep.Lstep_mean - L) / L * 100.0)
    assert len(rep.onestep_hist[0]) == 64


def test_oracle_matches_the_polygon_geometry():
    res = theorem_oracle(L=3, d=2, restarts=4, seed=0)
    assert res.passed
    assert res.objective == pytest.approx(3.0, abs=1e-3)
    assert res.chord_err < 1e-2 * 3
    assert res.antipodal_err < 1e-2 * 3
    assert res.circumradius_err < 1e-2 * 3
    # best points actually form a hexagon of circumradius L/2
    pts = res.points
    center = pts.mean(axis=0)
    radii = np.linalg.norm(pts - center, axis=1)
    assert np.allclose(radii, 1.5, atol=0.03)
