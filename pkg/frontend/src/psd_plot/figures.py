"""The figure kinds rendered by the psd-plot CLI."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import (
    SchemaError,
    read_metrics_jsonl,
    read_pca_csv,
    read_spectrum_csv,
    read_trajectory_csv,
)

# identical inputs must render identical bytes, so strip the only
# non-content PNG metadata matplotlib would add
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _save(fig, out) -> Path:
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, **_SAVE_KW)
    plt.close(fig)
    return out


def plot_spectrum_bars(in_path, out_path) -> Path:
    """Top-1 frequency per skill period, with 1/(2L) reference marks."""
    table = read_spectrum_csv(in_path)
    top = table["rank"] == 1
    Ls = table["L"][top]
    freqs = table["freq"][top]
    amps = table["amp"][top]
    order = np.argsort(Ls, kind="stable")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    x = np.arange(order.size)
    ax1.bar(x, freqs[order], color="steelblue")
    ax1.scatter(x, 1.0 / (2.0 * Ls[order]), color="crimson", marker="_",
                s=200, label="1/(2L)")
    ax1.set_xticks(x, [str(v) for v in Ls[order]])
    ax1.set_xlabel("period L")
    ax1.set_ylabel("top-1 frequency")
    ax1.legend()
    ax2.bar(x, amps[order], color="gray")
    ax2.set_xticks(x, [str(v) for v in Ls[order]])
    ax2.set_xlabel("period L")
    ax2.set_ylabel("top-1 amplitude")
    fig.tight_layout()
    return _save(fig, out_path)


def plot_latent_pca(in_path, out_path) -> Path:
    """2-D principal-component projection of latents, colored by period."""
    table = read_pca_csv(in_path)
    fig, ax = plt.subplots(figsize=(5, 4.5))
    sc = ax.scatter(table["pc1"], table["pc2"], c=table["L"], s=6,
                    cmap="viridis")
    fig.colorbar(sc, ax=ax, label="period L")
    ax.set_xlabel("pc1")
    ax.set_ylabel("pc2")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    return _save(fig, out_path)


def plot_bounds(in_path, out_path) -> Path:
    """Evolution of the sampled period range over training."""
    records = read_metrics_jsonl(in_path, required=("epoch", "L_min", "L_max"))
    epochs = [r["epoch"] for r in records]
    lo = [r["L_min"] for r in records]
    hi = [r["L_max"] for r in records]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.step(epochs, lo, where="post", label="L_min")
    ax.step(epochs, hi, where="post", label="L_max")
    ax.fill_between(epochs, lo, hi, step="post", alpha=0.15)
    ax.set_xlabel("epoch")
    ax.set_ylabel("period bound")
    ax.legend()
    fig.tight_layout()
    return _save(fig, out_path)


def plot_curves(in_path, out_path) -> Path:
    """Per-epoch training curves: returns and losses."""
    records = read_metrics_jsonl(in_path, required=("epoch",))
    epochs = [r["epoch"] for r in records]
    fig, axes = plt.subplots(2, 2, figsize=(9, 6))
    panels = [
        ("mean_return_psd", "intrinsic return"),
        ("encoder_loss", "encoder loss"),
        ("critic_loss", "critic loss"),
        ("alpha", "entropy coefficient"),
    ]
    for ax, (key, label) in zip(axes.flat, panels):
        ys = [(e, r[key]) for e, r in zip(epochs, records)
              if r.get(key) is not None]
        if ys:
            ax.plot([p[0] for p in ys], [p[1] for p in ys])
        ax.set_xlabel("epoch")
        ax.set_ylabel(label)
    fig.tight_layout()
    return _save(fig, out_path)


def plot_trajectory(in_path, out_path) -> Path:
    """One skill rollout: leading observation pair and reward trace."""
    traj = read_trajectory_csv(in_path)
    obs = traj["obs"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.8))
    if obs.shape[1] >= 2:
        ax1.plot(obs[:, 0], obs[:, 1], lw=0.8)
        ax1.set_xlabel("obs_0")
        ax1.set_ylabel("obs_1")
        ax1.set_aspect("equal", adjustable="datalim")
    else:
        ax1.plot(obs[:, 0], lw=0.8)
        ax1.set_xlabel("t")
        ax1.set_ylabel("obs_0")
    ax1.set_title(f"L = {traj['L']}")
    ax2.plot(traj["r_psd"], label="r_psd")
    ax2.plot(traj["r_ext"], label="r_ext", alpha=0.7)
    ax2.set_xlabel("t")
    ax2.set_ylabel("reward")
    ax2.legend()
    fig.tight_layout()
    return _save(fig, out_path)


KINDS = {
    "spectrum_bars": plot_spectrum_bars,
    "latent_pca": plot_latent_pca,
    "bounds": plot_bounds,
    "curves": plot_curves,
    "trajectory": plot_trajectory,
}
