"""Script statistics, comparisons, and delimited exports."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .fitness import FitnessBreakdown, FitnessWeights, fitness
from .model import DistributionVector, Script, SentencePool, UnitInventory, base_label

_STAT_FIELDS = (
    "base_syllable_coverage",
    "tonal_syllable_coverage",
    "script_distribution",
    "set_distribution_mean",
    "set_distribution_std",
)


@dataclass(frozen=True)
class ScriptStats:
    """Coverage and distribution statistics of one script.

    Coverages are counts of distinct units (tonal) and distinct stripped-tone
    labels (base). The standard deviation over per-set similarities is the
    population (divide-by-N) form.
    """

    base_syllable_coverage: int
    tonal_syllable_coverage: int
    script_distribution: float
    set_distribution_mean: float
    set_distribution_std: float
    histogram: DistributionVector


@dataclass(frozen=True)
class ScriptComparison:
    """Side-by-side statistics of two scripts plus field deltas."""

    rows: tuple[tuple[str, float, float, float], ...]

    def format(self) -> str:
        width = max(len(name) for name, *_ in self.rows)
        lines = [f"{'field'.ljust(width)}  {'a':>12} {'b':>12} {'delta':>12}"]
        for name, a, b, delta in self.rows:
            lines.append(f"{name.ljust(width)}  {a:>12.6g} {b:>12.6g} {delta:>+12.6g}")
        return "\n".join(lines)


def script_stats(
    script: Script, pool: SentencePool, d_real: DistributionVector
) -> ScriptStats:
    """Compute all statistics of a script against the reference distribution."""
    breakdown = fitness(script, pool, d_real, FitnessWeights(1, 1, 1))
    counts = np.zeros(pool.inventory.s, dtype=np.float64)
    for group in script.sets:
        for sid in group:
            for u in pool.get(sid).units:
                counts[u] += 1.0
    covered = np.nonzero(counts)[0]
    bases = {base_label(pool.inventory.labels[u]) for u in covered}
    per_set = np.array(breakdown.per_set_distribution)
    return ScriptStats(
        base_syllable_coverage=len(bases),
        tonal_syllable_coverage=len(covered),
        script_distribution=breakdown.script_distribution,
        set_distribution_mean=breakdown.set_distribution_mean,
        set_distribution_std=float(np.std(per_set)),
        histogram=DistributionVector(counts),
    )


def render_stats(stats: ScriptStats) -> str:
    """Key-value text form of a stats record."""
    lines = []
    for name in _STAT_FIELDS:
        value = getattr(stats, name)
        lines.append(f"{name}: {value}")
    lines.append(f"inventory_size: {len(stats.histogram)}")
    lines.append(f"unit_tokens: {int(stats.histogram.total)}")
    return "\n".join(lines)


def render_breakdown(breakdown: FitnessBreakdown) -> str:
    """Key-value text form of a fitness breakdown."""
    lines = [
        f"total: {breakdown.total}",
        f"script_distribution: {breakdown.script_distribution}",
        f"coverage: {breakdown.coverage}",
        f"set_distribution_mean: {breakdown.set_distribution_mean}",
    ]
    for i, value in enumerate(breakdown.per_set_distribution):
        lines.append(f"set_distribution[{i}]: {value}")
    return "\n".join(lines)


def compare_scripts(a: ScriptStats, b: ScriptStats) -> ScriptComparison:
    """Field-by-field comparison of two stats records over the same inventory."""
    if len(a.histogram) != len(b.histogram):
        raise ValidationError(
            f"cannot compare scripts over different inventories ({len(a.histogram)} vs {len(b.histogram)} units)"
        )
    rows = []
    for name in _STAT_FIELDS:
        va = float(getattr(a, name))
        vb = float(getattr(b, name))
        rows.append((name, va, vb, vb - va))
    return ScriptComparison(rows=tuple(rows))


def export_distribution(
    inventory: UnitInventory,
    script_hist: DistributionVector,
    d_real: DistributionVector,
    path: str | Path,
) -> None:
    """Write a (unit, script count, real count) CSV sorted by descending real count.

    The row order matches rank-frequency plots: most common real-world units
    first, ties broken by inventory order. Output bytes are deterministic.
    """
    s = inventory.s
    if len(script_hist) != s or len(d_real) != s:
        raise ValidationError(
            f"distribution lengths {len(script_hist)}/{len(d_real)} do not match inventory size {s}"
        )
    order = np.lexsort((np.arange(s), -d_real.counts))
    lines = ["unit,script_count,real_count"]
    for ix in order:
        label = inventory.labels[ix]
        if "," in label or '"' in label:
            label = '"' + label.replace('"', '""') + '"'
        lines.append(f"{label},{float(script_hist.counts[ix])!r},{float(d_real.counts[ix])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
