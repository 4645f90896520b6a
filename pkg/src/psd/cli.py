"""Command-line entry points: train, analyze, verify, eval."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    Pca,
    autocorr_period,
    geometry_report,
    normalize_and_project,
    random_rollout_stats,
    spectrum,
)
from .buffer import EpisodeBuffer
from .checkpoint import load_checkpoint, save_checkpoint
from .config import load_config
from .nn import ConfigurationError, NumericError
from .sac import rollout_episode
from .train import dump_final_trajectories, init_train_state, run_epoch, \
    write_metrics_line
from .trajectory import TrajectoryFormatError, read_trajectory_csv, \
    write_trajectory_csv
from .verify import gradcheck_report, invariants_report, theorem_report
from . import envs

EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _out_dir(requested) -> Path:
    """Resolve an output dir; PSD_OUT prefixes relative paths."""
    override = os.environ.get("PSD_OUT")
    return Path(override) / requested if override else Path(requested)


def cmd_train(args) -> int:
    try:
        if args.resume:
            state = load_checkpoint(args.resume)
            cfg = state.cfg
        else:
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
            state = init_train_state(cfg)
        if args.epochs is not None:
            cfg.epochs = args.epochs
    except ConfigurationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args.out or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics_path = out / "metrics.jsonl"
    if not args.resume and metrics_path.exists():
        metrics_path.unlink()
    try:
        while state.epoch < cfg.epochs:
            m = run_epoch(state)
            write_metrics_line(metrics_path, m)
            if cfg.checkpoint_every and state.epoch % cfg.checkpoint_every == 0:
                save_checkpoint(state, out / f"ckpt_{state.epoch:06d}.bin")
    except NumericError as e:
        print(f"numeric abort: {e}", file=sys.stderr)
        save_checkpoint(state, out / "last_good.bin")
        return EXIT_NUMERIC
    save_checkpoint(state, out / "final.bin")
    dump_final_trajectories(state, out / "trajectories")
    print(f"trained {state.epoch} epochs -> {out}")
    return 0


def _load_traj_dir(path: Path):
    files = sorted(Path(path).glob("*.csv"))
    if not files:
        raise TrajectoryFormatError(f"no trajectory CSVs in {path}")
    return [(f, read_trajectory_csv(f)) for f in files]


def cmd_analyze(args) -> int:
    try:
        if args.sub == "spectrum":
            pairs = _load_traj_dir(args.inputs[0])
            spec = envs.make_spec(args.env, pairs[0][1].states.shape[0])
            stats = random_rollout_stats(spec, seed=0)
            series = normalize_and_project([t for _, t in pairs], stats)
            out = Path(args.out or "spectrum.csv")
            with open(out, "w", newline="\n") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["skill_id", "L", "freq", "amp", "rank"])
                for (f, traj), s in zip(pairs, series):
                    sp = spectrum(s, k=args.top_k)
                    for rank, (freq, amp) in enumerate(sp.top_k, start=1):
                        w.writerow([f.stem, traj.L, repr(freq), repr(amp), rank])
            print(f"wrote {out}")
            return 0
        if args.sub == "geometry":
            state = load_checkpoint(args.inputs[0])
            buf = EpisodeBuffer()
            for _, traj in _load_traj_dir(args.inputs[1]):
                buf.push_episode(traj.all_states(), traj.actions,
                                 np.zeros(len(traj)), traj.L, z=traj.z)
            rep = geometry_report(state.encoder, buf, args.L,
                                  n_samples=args.samples)
            out = Path(args.out or f"geometry_L{args.L}.json")
            out.write_text(json.dumps({
                "L": rep.L,
                "onestep_mean": rep.onestep_mean,
                "Lstep_mean": rep.Lstep_mean,
                "rel_err_onestep": rep.rel_err_onestep,
                "rel_err_Lstep": rep.rel_err_Lstep,
            }, indent=2) + "\n")
            print(f"wrote {out}")
            return 0
        if args.sub == "pca":
            state = load_checkpoint(args.inputs[0])
            rows = []
            for _, traj in _load_traj_dir(args.inputs[1]):
                latents = state.encoder.encode(
                    traj.states, np.full(len(traj), traj.L), traj.z)
                rows.append((traj.L, latents))
            pca = Pca(np.vstack([lat for _, lat in rows]))
            out = Path(args.out or "latent_pca.csv")
            with open(out, "w", newline="\n") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["t", "L", "pc1", "pc2"])
                for L, lat in rows:
                    proj = pca.project(lat, 2)
                    for t, (p1, p2) in enumerate(proj):
                        w.writerow([t, L, repr(p1), repr(p2)])
            print(f"wrote {out}")
            return 0
        if args.sub == "period":
            traj = read_trajectory_csv(args.inputs[0])
            period = autocorr_period(traj.states[:, 0])
            print(period)
            return 0
        print(f"unknown analyze subcommand: {args.sub}", file=sys.stderr)
        return EXIT_CONFIG
    except (TrajectoryFormatError, ConfigurationError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..")
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in text.split(",")]


def cmd_verify(args) -> int:
    if args.sub == "theorem":
        report = theorem_report(L_values=_parse_range(args.L),
                                d_values=_parse_range(args.d))
    elif args.sub == "gradcheck":
        report = gradcheck_report()
    elif args.sub == "invariants":
        report = invariants_report()
    else:
        print(f"unknown verify subcommand: {args.sub}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    print(json.dumps(report, indent=2))
    return 0 if report["passed"] else EXIT_FAIL


def cmd_eval(args) -> int:
    try:
        state = load_checkpoint(args.ckpt)
    except (FileNotFoundError, ConfigurationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    z = None
    if args.z:
        z = np.array([float(v) for v in args.z.split(",")])
    traj = rollout_episode(state.agent, state.spec, args.L, seed=args.seed,
                           mode="mean", z=z)
    out = Path(args.out or f"eval_L{args.L}.csv")
    write_trajectory_csv(out, traj)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="psd",
                                description="periodic skill training toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="run the training loop")
    t.add_argument("--config", required=False)
    t.add_argument("--epochs", type=int)
    t.add_argument("--seed", type=int)
    t.add_argument("--resume")
    t.add_argument("--out")
    t.set_defaults(fn=cmd_train)

    a = sub.add_parser("analyze", help="produce analysis artifacts")
    a.add_argument("sub", choices=["spectrum", "geometry", "pca", "period"])
    a.add_argument("inputs", nargs="+")
    a.add_argument("--top-k", dest="top_k", type=int, default=4)
    a.add_argument("--L", type=int, default=10)
    a.add_argument("--samples", type=int, default=1000)
    a.add_argument("--env", default="ring_world")
    a.add_argument("--out")
    a.set_defaults(fn=cmd_analyze)

    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("sub", choices=["theorem", "gradcheck", "invariants"])
    v.add_argument("--L", default="2..4")
    v.add_argument("--d", default="2,3")
    v.add_argument("--out")
    v.set_defaults(fn=cmd_verify)

    e = sub.add_parser("eval", help="roll out a frozen policy")
    e.add_argument("--ckpt", required=True)
    e.add_argument("--L", type=int, required=True)
    e.add_argument("--z")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--out")
    e.set_defaults(fn=cmd_eval)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train" and not args.resume and not args.config:
        print("error: train needs --config or --resume", file=sys.stderr)
        return EXIT_CONFIG
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
