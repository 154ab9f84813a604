"""Genetic script composer: truncation selection plus set-paired crossover.

Each chromosome is a whole script; each gene is a sentence. Per generation
the population is scored, the top half is replicated twice, scripts are
shuffled and paired adjacently, and every aligned pair of sets undergoes a
duplicate-aware one-point crossover. There is no mutation step. The loop
stops once the best script seen has not improved for ``patience``
generations (or at the hard generation cap) and returns the best script
observed across all generations.

All randomness flows from the single config seed through one sequential
generator, so runs are reproducible bit for bit regardless of worker count:
population scoring, the only parallel region, is deterministic per script.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

from .errors import CapacityError, ConfigError, ValidationError
from .fitness import FitnessBreakdown, fitness
from .model import DistributionVector, FitnessWeights, Script, SentencePool

logger = logging.getLogger(__name__)

# Keep the per-sentence histogram matrix dense below this many cells.
_DENSE_CELLS = 4_000_000
# Cap on temporary array cells per scoring block.
_BLOCK_CELLS = 8_000_000
_SPARSE_BLOCK = 4096


@dataclass(frozen=True)
class GaConfig:
    """Composer settings.

    ``population_size`` must be even so that replicating the top half twice
    reproduces the population exactly. ``shape`` is (number of sets,
    sentences per set). ``patience`` counts generations without improvement
    of the best script seen before stopping.
    """

    population_size: int = 25_000
    shape: tuple[int, int] = (20, 20)
    weights: FitnessWeights = field(default_factory=FitnessWeights)
    patience: int = 50
    max_generations: int = 1000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        n_s, n = self.shape
        if self.population_size < 2 or self.population_size % 2 != 0:
            raise ConfigError("population_size must be an even integer >= 2")
        if n_s < 1 or n < 1:
            raise ConfigError("shape must have at least one set of one sentence")
        if self.patience < 1:
            raise ConfigError("patience must be >= 1")
        if self.max_generations < 1:
            raise ConfigError("max_generations must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


@dataclass
class Population:
    """A generation of candidate scripts."""

    scripts: list[Script]
    generation: int = 0
    best_so_far: tuple[Script, FitnessBreakdown] | None = None


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    max_fitness: float
    mean_fitness: float
    best_so_far: float
    dominance: float


@dataclass(frozen=True)
class GaTrace:
    """Per-generation statistics plus the first generation's best script.

    ``dominance`` is the fraction of the population occupied by its most
    common chromosome, an inspection aid for convergence.
    """

    records: tuple[GenerationRecord, ...]
    first_best: Script
    first_breakdown: FitnessBreakdown

    def write_csv(self, path: str | Path) -> None:
        lines = ["generation,max_fitness,mean_fitness,best_so_far,dominance"]
        for r in self.records:
            lines.append(
                f"{r.generation},{r.max_fitness!r},{r.mean_fitness!r},"
                f"{r.best_so_far!r},{r.dominance!r}"
            )
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


class PopulationEvaluator:
    """Vectorized fitness scoring of many scripts at once.

    Scripts are passed as arrays of pool row indices with shape
    (count, n_s, n). Small pools are scored through a dense per-sentence
    histogram matrix; larger ones go through sparse matrix products. Blocks
    are fixed by shape alone, so results do not depend on the worker count.
    """

    def __init__(
        self,
        pool: SentencePool,
        d_real: DistributionVector,
        weights: FitnessWeights,
        workers: int = 1,
    ):
        s = pool.inventory.s
        if len(d_real) != s:
            raise ValidationError(
                f"reference distribution length {len(d_real)} does not match inventory size {s}"
            )
        self.pool = pool
        self.weights = weights
        self.workers = workers
        self.s = s
        self.ids = np.fromiter((sent.id for sent in pool), dtype=np.int64, count=len(pool))
        self.id_to_row = {int(sid): i for i, sid in enumerate(self.ids)}

        unit_chunks = [np.asarray(sent.units, dtype=np.intp) for sent in pool]
        lengths = np.fromiter((len(c) for c in unit_chunks), dtype=np.intp, count=len(unit_chunks))
        cols = np.concatenate(unit_chunks)
        rows = np.repeat(np.arange(len(unit_chunks), dtype=np.intp), lengths)
        coo = sparse.coo_matrix(
            (np.ones(len(cols), dtype=np.int64), (rows, cols)), shape=(len(pool), s)
        )
        self.H = coo.tocsr()
        self.Hd = self.H.toarray() if len(pool) * s <= _DENSE_CELLS else None

        self.dr = d_real.counts
        self.nr_sq = float(np.dot(self.dr, self.dr))
        self.dr_dot = self.H @ self.dr

    def rows_for(self, script: Script) -> np.ndarray:
        try:
            return np.array(
                [[self.id_to_row[sid] for sid in group] for group in script.sets],
                dtype=np.int64,
            )
        except KeyError as exc:
            raise ValidationError(f"unknown sentence id {exc.args[0]} in script") from None

    def script_from_rows(self, rows: np.ndarray) -> Script:
        return Script(tuple(tuple(int(self.ids[r]) for r in group) for group in rows))

    def totals(self, rows: np.ndarray) -> np.ndarray:
        return self.evaluate(rows)[0]

    def evaluate(
        self, rows: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Score a (count, n_s, n) block of scripts.

        Returns (totals, script_distribution, coverage, set_distribution_mean).
        """
        count, n_s, n = rows.shape
        if count == 0:
            empty = np.zeros(0)
            return empty, empty.copy(), empty.copy(), empty.copy()
        if self.Hd is not None:
            block = max(1, _BLOCK_CELLS // max(1, n_s * n * self.s))
        else:
            block = _SPARSE_BLOCK
        slices = [slice(i, min(i + block, count)) for i in range(0, count, block)]
        if self.workers > 1 and len(slices) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as ex:
                parts = list(ex.map(lambda sl: self._score_block(rows[sl]), slices))
        else:
            parts = [self._score_block(rows[sl]) for sl in slices]
        return tuple(np.concatenate(p) for p in zip(*parts))  # type: ignore[return-value]

    def _score_block(self, rows: np.ndarray):
        count, n_s, n = rows.shape
        if self.Hd is not None:
            set_h = self.Hd[rows].sum(axis=2)
            script_h = set_h.sum(axis=1)
            set_nsq = np.einsum("iks,iks->ik", set_h, set_h)
            script_nsq = np.einsum("is,is->i", script_h, script_h)
            cov_count = np.count_nonzero(script_h, axis=1)
        else:
            flat = rows.reshape(-1)
            data = np.ones(flat.size, dtype=np.int64)
            set_sel = sparse.csr_matrix(
                (data, flat, np.arange(0, flat.size + 1, n)),
                shape=(count * n_s, len(self.ids)),
            )
            set_h = set_sel @ self.H
            set_nsq = np.add.reduceat(set_h.data * set_h.data, set_h.indptr[:-1]).reshape(
                count, n_s
            )
            script_sel = sparse.csr_matrix(
                (data, flat, np.arange(0, flat.size + 1, n_s * n)),
                shape=(count, len(self.ids)),
            )
            script_h = script_sel @ self.H
            script_nsq = np.add.reduceat(script_h.data * script_h.data, script_h.indptr[:-1])
            cov_count = np.diff(script_h.indptr)

        set_dot = self.dr_dot[rows].sum(axis=2)
        script_dot = set_dot.sum(axis=1)
        set_cos = _cosine_block(set_dot, set_nsq, self.nr_sq)
        script_cos = _cosine_block(script_dot, script_nsq, self.nr_sq)
        coverage = cov_count / self.s
        set_mean = set_cos.mean(axis=1)
        w = self.weights
        totals = w.w1 * script_cos + w.w2 * coverage + w.w3 * set_mean
        return totals, script_cos, coverage, set_mean


def _cosine_block(dot: np.ndarray, nsq: np.ndarray, nr_sq: float) -> np.ndarray:
    denom = np.sqrt(nsq.astype(np.float64) * nr_sq)
    out = np.zeros_like(denom)
    np.divide(dot, denom, out=out, where=denom > 0)
    return out


def _init_rows(rng: np.random.Generator, pool_size: int, config: GaConfig) -> np.ndarray:
    n_s, n = config.shape
    k = n_s * n
    if pool_size < k:
        raise CapacityError(
            f"pool of {pool_size} sentences cannot fill a {n_s}x{n} script"
        )
    rows = np.empty((config.population_size, n_s, n), dtype=np.int64)
    for i in range(config.population_size):
        rows[i] = rng.choice(pool_size, size=k, replace=False).reshape(n_s, n)
    return rows


def init_population(pool: SentencePool, config: GaConfig) -> Population:
    """Sample the initial population: every script draws n_s*n distinct sentences."""
    rng = np.random.default_rng(config.seed)
    rows = _init_rows(rng, len(pool), config)
    ids = np.fromiter((sent.id for sent in pool), dtype=np.int64, count=len(pool))
    scripts = [
        Script(tuple(tuple(int(ids[r]) for r in group) for group in rows[i]))
        for i in range(config.population_size)
    ]
    return Population(scripts=scripts, generation=0)


def truncation_select(
    population: Population,
    pool: SentencePool,
    d_real: DistributionVector,
    weights: FitnessWeights,
) -> Population:
    """Keep the fittest half, replicated twice, in descending fitness order.

    Ties are broken by the lower index in the incoming population (stable
    sort), so selection is deterministic.
    """
    n_p = len(population.scripts)
    if n_p % 2 != 0:
        raise ConfigError("population size must be even for truncation selection")
    ev = PopulationEvaluator(pool, d_real, weights)
    rows = np.stack([ev.rows_for(script) for script in population.scripts])
    totals = ev.totals(rows)
    order = np.argsort(-totals, kind="stable")
    top = order[: n_p // 2]
    selected = [population.scripts[int(i)] for i in np.repeat(top, 2)]
    return Population(
        scripts=selected,
        generation=population.generation,
        best_so_far=population.best_so_far,
    )


def _crossover_rows(
    x: np.ndarray, y: np.ndarray, u_points: np.ndarray, u_holds: np.ndarray
) -> None:
    """Set-paired one-point crossover with hold logic, in place.

    For each aligned pair of sets, sentences already present anywhere in the
    partner script are held; hold counts are equalized with uniformly random
    extra holds; held sentences move to the leading positions and a single
    point inside the non-held suffix is crossed. Pairs whose non-held region
    is shorter than 2 are skipped.
    """
    n_s, n = x.shape
    x_ids = set(x.ravel().tolist())
    y_ids = set(y.ravel().tolist())
    for i in range(n_s):
        xs = x[i].tolist()
        ys = y[i].tolist()
        held_x = [v in y_ids for v in xs]
        held_y = [v in x_ids for v in ys]
        hx = sum(held_x)
        hy = sum(held_y)
        if hx != hy:
            held, need = (held_x, hy - hx) if hx < hy else (held_y, hx - hy)
            free = [j for j in range(n) if not held[j]]
            free.sort(key=lambda j: u_holds[i, j])
            for j in free[:need]:
                held[j] = True
        h = max(hx, hy)
        m = n - h
        if m < 2:
            continue
        xs_held = [v for v, kept in zip(xs, held_x) if kept]
        xs_free = [v for v, kept in zip(xs, held_x) if not kept]
        ys_held = [v for v, kept in zip(ys, held_y) if kept]
        ys_free = [v for v, kept in zip(ys, held_y) if not kept]
        point = 1 + int(u_points[i] * (m - 1))
        x[i] = xs_held + xs_free[:point] + ys_free[point:]
        y[i] = ys_held + ys_free[:point] + xs_free[point:]


def crossover_pair(
    a: Script, b: Script, rng: np.random.Generator
) -> tuple[Script, Script]:
    """Cross two scripts set by set, never duplicating a sentence in either output."""
    if a.shape != b.shape:
        raise ValidationError(f"script shape mismatch: {a.shape} vs {b.shape}")
    n_s, n = a.shape
    for name, script in (("first", a), ("second", b)):
        ids = script.all_ids()
        if len(set(ids)) != len(ids):
            raise ValidationError(f"{name} script contains duplicate sentence ids")
    x = np.array(a.sets, dtype=np.int64)
    y = np.array(b.sets, dtype=np.int64)
    u_points = rng.random(n_s)
    u_holds = rng.random((n_s, n))
    _crossover_rows(x, y, u_points, u_holds)
    to_script = lambda arr: Script(tuple(tuple(int(v) for v in row) for row in arr))
    return to_script(x), to_script(y)


def _dominance(rows: np.ndarray) -> float:
    counts = Counter(r.tobytes() for r in rows.reshape(rows.shape[0], -1))
    return max(counts.values()) / rows.shape[0]


def evolve_rows(
    rows: np.ndarray,
    pool: SentencePool,
    d_real: DistributionVector,
    config: GaConfig,
    rng: np.random.Generator,
) -> tuple[Script, FitnessBreakdown, GaTrace]:
    """Run the generation loop from a prepared initial population."""
    ev = PopulationEvaluator(pool, d_real, config.weights, workers=config.workers)
    n_p, n_s, n = rows.shape
    records: list[GenerationRecord] = []
    best_rows: np.ndarray | None = None
    best_total = float("-inf")
    first_best_rows: np.ndarray | None = None
    streak = 0
    generation = 0
    while True:
        totals = ev.totals(rows)
        leader = int(np.argmax(totals))
        if best_rows is None or totals[leader] > best_total:
            best_total = float(totals[leader])
            best_rows = rows[leader].copy()
            streak = 0
        else:
            streak += 1
        if first_best_rows is None:
            first_best_rows = rows[leader].copy()
        records.append(
            GenerationRecord(
                generation=generation,
                max_fitness=float(totals.max()),
                mean_fitness=float(totals.mean()),
                best_so_far=best_total,
                dominance=_dominance(rows),
            )
        )
        if streak >= config.patience or generation >= config.max_generations:
            break
        order = np.argsort(-totals, kind="stable")
        selected = rows[np.repeat(order[: n_p // 2], 2)]
        perm = rng.permutation(n_p)
        u_points = rng.random((n_p // 2, n_s))
        u_holds = rng.random((n_p // 2, n_s, n))
        next_rows = np.empty_like(selected)
        for p in range(n_p // 2):
            first = selected[perm[2 * p]].copy()
            second = selected[perm[2 * p + 1]].copy()
            _crossover_rows(first, second, u_points[p], u_holds[p])
            next_rows[2 * p] = first
            next_rows[2 * p + 1] = second
        rows = next_rows
        generation += 1

    best_script = ev.script_from_rows(best_rows)
    first_script = ev.script_from_rows(first_best_rows)
    trace = GaTrace(
        records=tuple(records),
        first_best=first_script,
        first_breakdown=fitness(first_script, pool, d_real, config.weights),
    )
    breakdown = fitness(best_script, pool, d_real, config.weights)
    logger.info(
        "converged after %d generations, best fitness %.6f", generation, breakdown.total
    )
    return best_script, breakdown, trace


def evolve(
    pool: SentencePool, d_real: DistributionVector, config: GaConfig
) -> tuple[Script, FitnessBreakdown, GaTrace]:
    """Compose a script: random initialization followed by the generation loop."""
    rng = np.random.default_rng(config.seed)
    rows = _init_rows(rng, len(pool), config)
    return evolve_rows(rows, pool, d_real, config, rng)
