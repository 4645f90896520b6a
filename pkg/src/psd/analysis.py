"""Verification and figure-data machinery.

Frequency spectra of rolled-out trajectories, PCA projections of states
and latents, autocorrelation period estimation, latent-geometry reports
against the closed-form optimum, and a brute-force numeric oracle for the
regular-2L-gon optimality claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .buffer import EpisodeBuffer, InsufficientDataError
from .encoder import PsdEncoder, optimal_chord
from .nn import ConfigurationError
from . import envs
from .trajectory import SkillTrajectory


class DegenerateDataError(ValueError):
    pass


class AperiodicSignalError(ValueError):
    pass


# -- PCA ------------------------------------------------------------------

class Pca:
    """PCA via eigendecomposition of the sample covariance.

    Sign convention: the largest-magnitude entry of each component is
    positive, so fits are deterministic.
    """

    def __init__(self, X: np.ndarray):
        X = np.asarray(X, dtype=np.float64)
        self.mean = X.mean(axis=0)
        cov = np.cov(X - self.mean, rowvar=False, bias=False)
        cov = np.atleast_2d(cov)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1]
        self.explained_variance = evals[order]
        comps = evecs[:, order].T
        for i in range(comps.shape[0]):
            j = np.argmax(np.abs(comps[i]))
            if comps[i, j] < 0:
                comps[i] = -comps[i]
        self.components = comps

    def project(self, X: np.ndarray, k: int = 1) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean) @ self.components[:k].T


def random_rollout_stats(spec: envs.EnvSpec, n_episodes: int = 10,
                         seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean/std of states under uniform random actions."""
    rng = np.random.default_rng(seed)
    rows = []
    for e in range(n_episodes):
        state = envs.reset(spec, seed * 1000 + e)
        for _ in range(spec.episode_length):
            rows.append(state.observation)
            a = rng.uniform(-1.0, 1.0, size=spec.act_dim)
            state, _ = envs.step(spec, state, a)
    X = np.array(rows)
    return X.mean(axis=0), X.std(axis=0)


def normalize_and_project(trajs: list[SkillTrajectory],
                          rand_stats: tuple[np.ndarray, np.ndarray]
                          ) -> list[np.ndarray]:
    """Standardize states with random-rollout statistics, fit PCA on the
    pooled data, and project each trajectory to its first component."""
    mean, std = rand_stats
    std = np.maximum(std, 1e-8)
    normed = [(t.states - mean) / std for t in trajs]
    pooled = np.vstack(normed)
    spans = pooled.max(axis=0) - pooled.min(axis=0)
    if np.all(spans < 1e-12):
        raise DegenerateDataError(
            f"all {pooled.shape[1]} dimensions are constant; nothing to project"
        )
    pca = Pca(pooled)
    return [pca.project(X, 1)[:, 0] for X in normed]


# -- spectrum ----------------------------------------------------------------

@dataclass
class Spectrum:
    freqs: np.ndarray
    amps: np.ndarray
    top_k: list = field(default_factory=list)


def spectrum(series: np.ndarray, k: int = 4, hann: bool = False) -> Spectrum:
    """Magnitude spectrum of the mean-removed series; top_k excludes DC."""
    x = np.asarray(series, dtype=np.float64)
    if x.size < 8:
        raise ConfigurationError(f"series too short for a spectrum: {x.size}")
    x = x - x.mean()
    if hann:
        x = x * np.hanning(x.size)
    X = np.fft.rfft(x)
    freqs = np.fft.rfftfreq(x.size, d=1.0)
    amps = np.abs(X) * 2.0 / x.size
    amps[0] /= 2.0
    if x.size % 2 == 0:
        amps[-1] /= 2.0
    order = np.argsort(amps[1:])[::-1] + 1
    top = [(float(freqs[i]), float(amps[i])) for i in order[:k]]
    return Spectrum(freqs=freqs, amps=amps, top_k=top)


def parseval_gap(series: np.ndarray) -> float:
    """|time-domain energy - spectral energy| for the full transform."""
    x = np.asarray(series, dtype=np.float64)
    X = np.fft.fft(x)
    return abs(float(np.sum(x**2)) - float(np.sum(np.abs(X) ** 2)) / x.size)


# -- autocorrelation period ---------------------------------------------------

def autocorr_period(series: np.ndarray, prominence: float = 0.5) -> int:
    """Lag of the first positive autocorrelation peak with height at least
    `prominence` of the lag-0 value."""
    x = np.asarray(series, dtype=np.float64)
    x = x - x.mean()
    denom = float(np.dot(x, x))
    if denom < 1e-30:
        raise AperiodicSignalError("constant series has no period")
    n = x.size
    ac = np.correlate(x, x, mode="full")[n - 1:] / denom
    limit = n // 2
    for lag in range(1, limit):
        if ac[lag] >= prominence and ac[lag] >= ac[lag - 1] and (
            lag + 1 >= limit or ac[lag] >= ac[lag + 1]
        ):
            return lag
    raise AperiodicSignalError("no prominent autocorrelation peak found")


# -- latent geometry -----------------------------------------------------------

@dataclass
class GeometryReport:
    L: int
    onestep_mean: float
    Lstep_mean: float
    rel_err_onestep: float
    rel_err_Lstep: float
    onestep_hist: tuple
    Lstep_hist: tuple


def geometry_report(encoder: PsdEncoder, buffer: EpisodeBuffer, L: int,
                    n_samples: int = 1000, rng: np.random.Generator | None = None,
                    bins: int = 64) -> GeometryReport:
    """Empirical 1-step / L-step latent distance statistics at period L."""
    rng = rng or np.random.default_rng(0)
    sub = EpisodeBuffer(capacity=buffer.capacity)
    sub.episodes = [ep for ep in buffer.episodes if ep.L == L]
    sub._size = sum(len(ep) for ep in sub.episodes)
    if sub.tuple_start_counts().sum() < 1:
        raise InsufficientDataError(f"no tuples at L={L}")
    batch = sub.sample_tuple_batch(rng, n_samples)
    Ls, s_t, s_t1, s_tL = batch[:4]
    z = batch[4] if len(batch) > 4 else None
    p_t = encoder.encode(s_t, Ls, z)
    p_t1 = encoder.encode(s_t1, Ls, z)
    p_tL = encoder.encode(s_tL, Ls, z)
    d1 = np.linalg.norm(p_t1 - p_t, axis=1)
    dL = np.linalg.norm(p_tL - p_t, axis=1)
    opt1 = optimal_chord(L)
    return GeometryReport(
        L=L,
        onestep_mean=float(d1.mean()),
        Lstep_mean=float(dL.mean()),
        rel_err_onestep=abs(float(d1.mean()) - opt1) / opt1 * 100.0,
        rel_err_Lstep=abs(float(dL.mean()) - L) / L * 100.0,
        onestep_hist=np.histogram(d1, bins=bins),
        Lstep_hist=np.histogram(dL, bins=bins),
    )


# -- polygon optimality oracle ---------------------------------------------------

@dataclass
class OracleResult:
    L: int
    d: int
    points: np.ndarray
    objective: float
    circumradius_err: float
    chord_err: float
    antipodal_err: float
    tol: float
    passed: bool


def _oracle_objective(P: np.ndarray, L: int, k: float) -> np.ndarray:
    """Raw constrained objective value per restart; P is (R, 2L, d)."""
    D = np.roll(P, -L, axis=1) - P
    A = np.roll(P, -L, axis=1) + P
    d = np.linalg.norm(D, axis=2)
    a = np.linalg.norm(A, axis=2)
    return (d - k * a).mean(axis=1)


def theorem_oracle(L: int, d: int, restarts: int = 16, seed: int = 0,
                   k: float = 0.5, iters_per_stage: int = 800) -> OracleResult:
    """Directly maximize the circular-representation objective over 2L free
    points with a penalty method (annealed 1 -> 1e4) and random restarts.

    Checks the optimizer's best configuration against the closed-form
    optimum: circumradius L/2, adjacent chord L*sin(pi/2L), antipodal
    opposition, objective L.
    """
    if not 2 <= L <= 6 or d not in (2, 3):
        raise ConfigurationError("oracle supports L in [2, 6] and d in {2, 3}")
    rng = np.random.default_rng(seed)
    M = 2 * L
    chord = optimal_chord(L)
    P = rng.normal(0.0, L / 2.0, size=(restarts, M, d))
    floor = 1e-12
    stages = [
        (1.0, 0.02 * L), (10.0, 0.02 * L), (100.0, 0.01 * L),
        (1e3, 0.005 * L), (1e4, 0.002 * L), (1e4, 5e-4 * L), (1e4, 1e-4 * L),
    ]
    for rho, lr in stages:
        m = np.zeros_like(P)
        v = np.zeros_like(P)
        step = 0
        for _ in range(iters_per_stage):
            Pshift = np.roll(P, -L, axis=1)
            D = Pshift - P
            A = Pshift + P
            C = np.roll(P, -1, axis=1) - P
            dn = np.sqrt((D**2).sum(axis=2) + floor)
            an = np.sqrt((A**2).sum(axis=2) + floor)
            cn = np.sqrt((C**2).sum(axis=2) + floor)
            U = D / dn[..., None]
            V = A / an[..., None]
            W = C / cn[..., None]
            # gradient of the mean objective with quadratic penalties:
            # sum_i [ s_i*d_i - k*a_i + w_i-weighted chord penalty ]
            su = (1.0 - 2.0 * rho * np.maximum(0.0, dn - L))[..., None] * U
            ww = (-2.0 * rho * np.maximum(0.0, cn - chord))[..., None] * W
            g = -su + np.roll(su, L, axis=1)
            g -= k * (V + np.roll(V, L, axis=1))
            g += -ww + np.roll(ww, 1, axis=1)
            g /= M
            # Adam ascent
            step += 1
            m = 0.9 * m + 0.1 * g
            v = 0.999 * v + 0.001 * g * g
            mh = m / (1.0 - 0.9**step)
            vh = v / (1.0 - 0.999**step)
            P = P + lr * mh / (np.sqrt(vh) + 1e-8)


    objs = _oracle_objective(P, L, k)
    best = int(np.argmax(objs))
    pts = P[best]
    radii = np.linalg.norm(pts, axis=1)
    chords = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
    anti = np.linalg.norm(np.roll(pts, -L, axis=0) + pts, axis=1)
    tol = 1e-2 * L
    result = OracleResult(
        L=L,
        d=d,
        points=pts,
        objective=float(objs[best]),
        circumradius_err=float(np.max(np.abs(radii - L / 2.0))),
        chord_err=float(np.max(np.abs(chords - chord))),
        antipodal_err=float(np.max(anti)),
        tol=tol,
        passed=False,
    )
    result.passed = (
        abs(result.objective - L) <= 1e-3
        and result.circumradius_err <= tol
        and result.chord_err <= tol
        and result.antipodal_err <= tol
    )
    return result
