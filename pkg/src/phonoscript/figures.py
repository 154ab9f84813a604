"""Render report figures next to the delimited exports.

Figures are written straight to image files (Agg backend); nothing is shown
interactively. Matplotlib is imported lazily so library use stays light.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .model import DistributionVector, UnitInventory


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def save_distribution_figure(
    inventory: UnitInventory,
    script_hist: DistributionVector,
    d_real: DistributionVector,
    path: str | Path,
) -> None:
    """Rank-frequency panel: script vs reference unit distribution.

    Units are ranked by descending reference count; both curves are
    normalized to relative frequency so corpora of different sizes stay
    comparable.
    """
    plt = _pyplot()
    order = np.lexsort((np.arange(inventory.s), -d_real.counts))
    real = d_real.counts[order]
    script = script_hist.counts[order]
    real_freq = real / real.sum() if real.sum() > 0 else real
    script_freq = script / script.sum() if script.sum() > 0 else script
    fig, ax = plt.subplots(figsize=(7, 3.2))
    x = np.arange(inventory.s)
    ax.fill_between(x, real_freq, color="0.8", label="reference")
    ax.plot(x, script_freq, color="tab:red", lw=0.9, label="script")
    ax.set_xlabel("unit rank (by reference frequency)")
    ax.set_ylabel("relative frequency")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_trace_figure(trace, path: str | Path) -> None:
    """Fitness-vs-generation curves for one composer run."""
    plt = _pyplot()
    gens = [r.generation for r in trace.records]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(gens, [r.best_so_far for r in trace.records], label="best so far", color="tab:blue")
    ax.plot(gens, [r.max_fitness for r in trace.records], label="generation max",
            color="tab:orange", lw=0.9, alpha=0.8)
    ax.plot(gens, [r.mean_fitness for r in trace.records], label="generation mean",
            color="0.5", lw=0.9, alpha=0.8)
    ax.set_xlabel("generation")
    ax.set_ylabel("fitness")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
