"""Fitness of a script against a reference unit distribution.

The total fitness is a weighted sum of three components, each in [0, 1]:

* script distribution: cosine similarity between the whole script's unit
  histogram and the reference distribution;
* coverage: fraction of the inventory's units that appear in the script;
* set distribution: mean cosine similarity between each set's histogram and
  the reference distribution.

Histograms are kept as integer counts internally so that incremental updates
(used heavily by the greedy replacer) reproduce a full recomputation bit for
bit whenever the reference distribution is integer-valued.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import (
    DistributionVector,
    FitnessWeights,
    Script,
    SentencePool,
    validate_script,
)

# swap coordinates: (set index, position in set, replacement sentence id)
Swap = tuple[int, int, int]


@dataclass(frozen=True)
class FitnessBreakdown:
    """All fitness components of one script plus their weighted total."""

    script_distribution: float
    coverage: float
    set_distribution_mean: float
    per_set_distribution: tuple[float, ...]
    total: float


def _cosine_from_products(dot: float, nsq_a: float, nsq_b: float) -> float:
    """Cosine from a dot product and two squared norms; 0 on degenerate input."""
    if nsq_a <= 0 or nsq_b <= 0:
        return 0.0
    return float(dot) / math.sqrt(float(nsq_a) * float(nsq_b))


def _compose(
    script_cos: float,
    coverage: float,
    set_cos: np.ndarray,
    weights: FitnessWeights,
) -> FitnessBreakdown:
    mean = float(np.mean(set_cos))
    total = weights.w1 * script_cos + weights.w2 * coverage + weights.w3 * mean
    return FitnessBreakdown(
        script_distribution=script_cos,
        coverage=coverage,
        set_distribution_mean=mean,
        per_set_distribution=tuple(float(c) for c in set_cos),
        total=float(total),
    )


def cosine_similarity(a: DistributionVector, b: DistributionVector) -> float:
    """Cosine similarity of two equal-length distributions; 0 if either is all-zero."""
    if len(a) != len(b):
        raise ValidationError(f"distribution length mismatch: {len(a)} vs {len(b)}")
    dot = float(np.dot(a.counts, b.counts))
    nsq_a = float(np.dot(a.counts, a.counts))
    nsq_b = float(np.dot(b.counts, b.counts))
    return _cosine_from_products(dot, nsq_a, nsq_b)


class IncrementalFitness:
    """Fitness state of one script with O(changed units) swap evaluation.

    Construction costs one pass over the script; ``delta`` prices a candidate
    single-sentence swap without mutating, and ``apply`` commits one.
    """

    def __init__(
        self,
        script: Script,
        pool: SentencePool,
        d_real: DistributionVector,
        weights: FitnessWeights,
    ):
        validate_script(script, pool)
        s = pool.inventory.s
        if len(d_real) != s:
            raise ValidationError(
                f"reference distribution length {len(d_real)} does not match inventory size {s}"
            )
        self.pool = pool
        self.weights = weights
        self.s = s
        self.dr = d_real.counts
        self.nr_sq = float(np.dot(self.dr, self.dr))

        self.sets = [list(group) for group in script.sets]
        self.n_s = len(self.sets)
        self._positions = {
            sid: (i, j) for i, group in enumerate(self.sets) for j, sid in enumerate(group)
        }

        self.set_hists = np.zeros((self.n_s, s), dtype=np.int64)
        for i, group in enumerate(self.sets):
            units = np.concatenate(
                [np.asarray(pool.get(sid).units, dtype=np.intp) for sid in group]
            )
            self.set_hists[i] = np.bincount(units, minlength=s)
        self.script_hist = self.set_hists.sum(axis=0)

        self.set_dots = self.set_hists @ self.dr
        self.set_nsq = np.einsum("ks,ks->k", self.set_hists, self.set_hists)
        self.script_dot = float(self.script_hist @ self.dr)
        self.script_nsq = int(np.dot(self.script_hist, self.script_hist))
        self.cov_count = int(np.count_nonzero(self.script_hist))
        self._set_cos = np.array(
            [
                _cosine_from_products(self.set_dots[i], self.set_nsq[i], self.nr_sq)
                for i in range(self.n_s)
            ]
        )

    def script(self) -> Script:
        return Script(tuple(tuple(group) for group in self.sets))

    def breakdown(self) -> FitnessBreakdown:
        script_cos = _cosine_from_products(self.script_dot, self.script_nsq, self.nr_sq)
        return _compose(script_cos, self.cov_count / self.s, self._set_cos, self.weights)

    def _swap_terms(self, set_index: int, position: int, new_id: int):
        """Shared delta arithmetic; returns the would-be state scalars."""
        old_id = self.sets[set_index][position]
        if new_id != old_id:
            clash = self._positions.get(new_id)
            if clash is not None:
                raise ValidationError(
                    f"swap would duplicate sentence id {new_id} (already at set {clash[0]}, position {clash[1]})"
                )
        changes = Counter(self.pool.get(new_id).units)
        for u in self.pool.get(old_id).units:
            changes[u] -= 1
        set_dot = float(self.set_dots[set_index])
        set_nsq = int(self.set_nsq[set_index])
        script_dot = self.script_dot
        script_nsq = self.script_nsq
        cov = self.cov_count
        for u, c in changes.items():
            if c == 0:
                continue
            h_set = int(self.set_hists[set_index, u])
            h_scr = int(self.script_hist[u])
            set_nsq += c * (2 * h_set + c)
            script_nsq += c * (2 * h_scr + c)
            dru = float(self.dr[u])
            set_dot += c * dru
            script_dot += c * dru
            if h_scr == 0 and c > 0:
                cov += 1
            elif h_scr > 0 and h_scr + c == 0:
                cov -= 1
        return changes, set_dot, set_nsq, script_dot, script_nsq, cov

    def delta(self, set_index: int, position: int, new_id: int) -> FitnessBreakdown:
        """Breakdown the script would have after the swap, without applying it."""
        _, set_dot, set_nsq, script_dot, script_nsq, cov = self._swap_terms(
            set_index, position, new_id
        )
        set_cos = self._set_cos.copy()
        set_cos[set_index] = _cosine_from_products(set_dot, set_nsq, self.nr_sq)
        script_cos = _cosine_from_products(script_dot, script_nsq, self.nr_sq)
        return _compose(script_cos, cov / self.s, set_cos, self.weights)

    def apply(self, set_index: int, position: int, new_id: int) -> None:
        """Commit a swap, updating all cached state in place."""
        changes, set_dot, set_nsq, script_dot, script_nsq, cov = self._swap_terms(
            set_index, position, new_id
        )
        old_id = self.sets[set_index][position]
        if new_id == old_id:
            return
        for u, c in changes.items():
            if c:
                self.set_hists[set_index, u] += c
                self.script_hist[u] += c
        self.set_dots[set_index] = set_dot
        self.set_nsq[set_index] = set_nsq
        self.script_dot = script_dot
        self.script_nsq = script_nsq
        self.cov_count = cov
        self._set_cos[set_index] = _cosine_from_products(set_dot, set_nsq, self.nr_sq)
        self.sets[set_index][position] = new_id
        del self._positions[old_id]
        self._positions[new_id] = (set_index, position)


def fitness(
    script: Script,
    pool: SentencePool,
    d_real: DistributionVector,
    weights: FitnessWeights,
) -> FitnessBreakdown:
    """Full fitness breakdown of a script."""
    return IncrementalFitness(script, pool, d_real, weights).breakdown()


def script_syllable_distribution(
    script: Script, pool: SentencePool, d_real: DistributionVector
) -> float:
    """Cosine similarity between the whole script's histogram and d_real."""
    return fitness(script, pool, d_real, FitnessWeights(1, 0, 0)).script_distribution


def set_syllable_distribution(
    script: Script, pool: SentencePool, d_real: DistributionVector
) -> tuple[float, list[float]]:
    """Mean and per-set cosine similarity against d_real."""
    bd = fitness(script, pool, d_real, FitnessWeights(0, 0, 1))
    return bd.set_distribution_mean, list(bd.per_set_distribution)


def script_syllable_coverage(
    script: Script, pool: SentencePool, s: int | None = None
) -> float:
    """Fraction of the s possible units that occur in the script.

    The denominator defaults to the observed inventory size and is never a
    hardcoded constant.
    """
    if s is None:
        s = pool.inventory.s
    if s <= 0:
        raise ValidationError("inventory size must be positive")
    distinct: set[int] = set()
    for group in script.sets:
        for sid in group:
            distinct.update(pool.get(sid).units)
    return len(distinct) / s


def fitness_delta(
    script: Script,
    pool: SentencePool,
    d_real: DistributionVector,
    weights: FitnessWeights,
    swap: Swap,
) -> FitnessBreakdown:
    """Breakdown after one swap, computed by histogram increment/decrement.

    Identical to recomputing :func:`fitness` on the swapped script. A swap
    that would introduce a duplicate sentence raises a validation error.
    """
    set_index, position, new_id = swap
    state = IncrementalFitness(script, pool, d_real, weights)
    if not 0 <= set_index < state.n_s:
        raise ValidationError(f"swap set index {set_index} out of range")
    if not 0 <= position < len(state.sets[set_index]):
        raise ValidationError(f"swap position {position} out of range")
    return state.delta(set_index, position, new_id)
