"""Self-verification suites: finite-difference gradient checks, the polygon
optimality oracle, and fast property checks over the core operations."""

from __future__ import annotations

import numpy as np

from .analysis import parseval_gap, theorem_oracle
from .autodiff import Tensor, norm_rows
from .buffer import EpisodeBuffer
from .encoder import PsdEncoder, PsdEncoderConfig, embed_period, optimal_chord, \
    psd_encoder_loss
from .nn import MlpSpec, ParamSet, init_mlp, mlp_apply, polyak_update
from .reward import r_psd


def finite_diff_check(loss_fn, params: ParamSet, rng: np.random.Generator,
                      h: float = 1e-4, coords_per_array: int = 4) -> float:
    """Max relative error between analytic and central-difference gradients
    over randomly sampled coordinates."""
    tensors = params.as_tensors()
    loss = loss_fn(tensors)
    loss.backward()

    def eval_loss():
        t = {n: Tensor(a) for n, a in params.items()}
        return float(loss_fn(t).data)

    worst = 0.0
    for name in params.names():
        arr = params[name]
        g = tensors[name].grad
        if g is None:
            continue
        flat = arr.reshape(-1)
        idxs = rng.choice(flat.size, size=min(coords_per_array, flat.size),
                          replace=False)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + h
            up = eval_loss()
            flat[i] = orig - h
            dn = eval_loss()
            flat[i] = orig
            fd = (up - dn) / (2.0 * h)
            an = g.reshape(-1)[i]
            rel = abs(an - fd) / max(abs(an), abs(fd), 1e-6)
            worst = max(worst, rel)
    return worst


def gradcheck_report(seeds: int = 5) -> dict:
    """Gradient checks for every network shape used in the artifact."""
    results = {}
    worst = 0.0
    for seed in range(seeds):
        rng = np.random.default_rng(seed)

        # plain MLP regression loss
        spec = MlpSpec(4, 2, 16, 3)
        params = init_mlp(spec, rng)
        x = Tensor(rng.standard_normal((8, 4)))
        y = rng.standard_normal((8, 3))
        err = finite_diff_check(
            lambda t: ((mlp_apply(spec, t, x) - Tensor(y)) ** 2).mean(),
            params, rng)
        results[f"mlp_seed{seed}"] = err
        worst = max(worst, err)

        # circular-encoder loss (norms, min clamps)
        cfg = PsdEncoderConfig(d=3, hidden_layers=1, hidden_units=12)
        enc = PsdEncoder(obs_dim=5, cfg=cfg, rng=rng)
        batch = (
            np.full(6, 7), rng.standard_normal((6, 5)),
            rng.standard_normal((6, 5)), rng.standard_normal((6, 5)),
        )
        err = finite_diff_check(
            lambda t: psd_encoder_loss(enc, t, batch), enc.params, rng)
        results[f"encoder_seed{seed}"] = err
        worst = max(worst, err)

        # tanh-policy style head with norms
        spec2 = MlpSpec(3, 1, 10, 4, activation="tanh")
        params2 = init_mlp(spec2, rng)
        x2 = Tensor(rng.standard_normal((5, 3)))
        err = finite_diff_check(
            lambda t: norm_rows(mlp_apply(spec2, t, x2).tanh()).mean(),
            params2, rng)
        results[f"policy_head_seed{seed}"] = err
        worst = max(worst, err)
    results["max_rel_err"] = worst
    results["passed"] = bool(worst < 1e-4)
    return results


def theorem_report(L_values=(2, 3, 4), d_values=(2, 3)) -> dict:
    cases = {}
    ok = True
    for L in L_values:
        for d in d_values:
            r = theorem_oracle(L, d)
            cases[f"L{L}_d{d}"] = {
                "objective": r.objective,
                "circumradius_err": r.circumradius_err,
                "chord_err": r.chord_err,
                "antipodal_err": r.antipodal_err,
                "tol": r.tol,
                "passed": r.passed,
            }
            ok = ok and r.passed
    return {"cases": cases, "passed": ok}


def invariants_report() -> dict:
    """Fast property checks over the pure operations."""
    checks = {}
    rng = np.random.default_rng(0)

    emb = np.concatenate([embed_period(L, 8) for L in range(0, 50)])
    checks["embedding_in_unit_range"] = bool(np.all(np.abs(emb) <= 1.0))

    chords = np.array([optimal_chord(L) for L in range(1, 200)])
    checks["chord_strictly_increasing"] = bool(np.all(np.diff(chords) > 0))
    perims = 2 * np.arange(1, 200) * chords
    checks["polygon_perimeter_below_circle"] = bool(
        np.all(perims <= np.pi * np.arange(1, 200) + 1e-12))

    devs = rng.normal(0, 2, 1000)
    r = r_psd(devs, 10.0)
    checks["r_psd_in_unit_interval"] = bool(np.all((r > 0) & (r <= 1.0)))
    checks["r_psd_even"] = bool(np.allclose(r, r_psd(-devs, 10.0)))

    buf = EpisodeBuffer(capacity=10_000)
    for L in (5, 9):
        T = 40
        states = rng.standard_normal((T + 1, 3))
        buf.push_episode(states, rng.standard_normal((T, 1)), np.zeros(T), L)
    batch = buf.sample_tuple_batch(rng, 500)
    ok = True
    for j in range(500):
        L = int(batch[0][j])
        ep = next(e for e in buf.episodes if e.L == L)
        found = any(
            np.array_equal(batch[1][j], ep.states[t])
            and np.array_equal(batch[3][j], ep.states[t + L])
            for t in range(len(ep) - L)
        )
        ok = ok and found
    checks["tuples_stay_within_episode"] = ok

    target = ParamSet()
    target.add("w", np.ones(4))
    online = ParamSet()
    online.add("w", np.zeros(4))
    polyak_update(target, online, 0.995)
    checks["polyak_convention"] = bool(np.allclose(target["w"], 0.995))

    sig = np.sin(2 * np.pi * 0.05 * np.arange(256)) + rng.normal(0, 0.1, 256)
    checks["parseval_identity"] = bool(parseval_gap(sig) < 1e-9)

    return {"checks": checks, "passed": all(checks.values())}
