"""Figure rendering for sweep and pruning reports (written next to the CSV)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .harness import fit_loglog_slope

__all__ = ["save_sweep_figures", "save_prune_figure"]


def save_sweep_figures(rows, out_dir) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    models = sorted({r["model"] for r in rows})

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for model in models:
        mrows = [r for r in rows if r["model"] == model and r["samples_read"] > 0]
        if not mrows:
            continue
        ks = np.array([r["k"] for r in mrows], dtype=float)
        samples = np.array([r["samples_read"] for r in mrows], dtype=float)
        slope = fit_loglog_slope(ks, samples)
        label = model if np.isnan(slope) else f"{model} (slope {slope:.2f})"
        ax.loglog(ks, samples, "o", alpha=0.6, label=label)
        if not np.isnan(slope):
            kk = np.array(sorted(set(ks)))
            coef = np.polyfit(np.log(ks), np.log(samples), 1)
            ax.loglog(kk, np.exp(np.polyval(coef, np.log(kk))), "-", alpha=0.8)
    ax.set_xlabel("sparsity k")
    ax.set_ylabel("samples read")
    ax.set_title("Sample complexity vs sparsity")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    p = out / "samples_vs_k.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    rates = []
    for model in models:
        mrows = [r for r in rows if r["model"] == model]
        rates.append(sum(r["success"] for r in mrows) / len(mrows) if mrows else 0.0)
    ax.bar(models, rates, color="tab:blue", alpha=0.8)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("success rate")
    ax.set_title("Recovery success by model")
    for i, v in enumerate(rates):
        ax.text(i, v + 0.02, f"{v:.2f}", ha="center")
    fig.tight_layout()
    p = out / "success_rate.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)
    return paths


def save_prune_figure(rows, out_dir) -> list:
    """rows: (log_n, c, tau, leaves, rounds, bound, holds)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    cs = sorted({r[1] for r in rows})
    markers = "osD^v"
    for i, c in enumerate(cs):
        crows = [r for r in rows if r[1] == c]
        bounds = [r[5] for r in crows]
        rounds = [r[4] for r in crows]
        ax.plot(bounds, rounds, markers[i % len(markers)], alpha=0.7, label=f"radius c={c}")
    lim = max(max((r[4] for r in rows), default=1), max((r[5] for r in rows), default=1))
    diag = np.linspace(0, lim * 1.05, 10)
    ax.plot(diag, diag, "k--", alpha=0.5, label="rounds = bound")
    ax.set_xlabel("analytic lower bound")
    ax.set_ylabel("simulated rounds")
    ax.set_title("Tree pruning: simulation vs lower bound")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    p = out / "prune_lower_bound.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    return [p]
