"""Core domain types: sentences, unit inventories, distributions, scripts.

Everything here is immutable after construction and safe to share across
parallel workers. The "unit" is an opaque label string (in practice a tonal
syllable such as ``ma1``); sentences carry their unit sequence as dense
indices into a :class:`UnitInventory`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ValidationError


def base_label(label: str) -> str:
    """Return the label with a single trailing ASCII digit stripped, if any.

    Supports the pinyin-plus-tone-digit convention ("ma1" -> "ma") without
    hardcoding any inventory.
    """
    if label and label[-1].isdigit():
        return label[:-1]
    return label


class UnitInventory:
    """Bidirectional mapping between unit labels and dense indices.

    The number of distinct labels defines the dimension of every
    :class:`DistributionVector` built against this inventory.
    """

    __slots__ = ("labels", "index")

    def __init__(self, labels: Sequence[str]):
        labels = tuple(labels)
        index: dict[str, int] = {}
        for i, label in enumerate(labels):
            if label in index:
                raise ValidationError(f"duplicate unit label {label!r} in inventory")
            index[label] = i
        self.labels = labels
        self.index = index

    @property
    def s(self) -> int:
        """Count of distinct unit labels (the vector dimension)."""
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UnitInventory) and self.labels == other.labels

    def __repr__(self) -> str:
        return f"UnitInventory(s={self.s})"


@dataclass(frozen=True)
class Sentence:
    """One candidate sentence.

    ``units`` are indices into the pool's inventory. The optional annotations
    (perplexity, intelligibility, POS tags) are consumed by the filter
    pipeline; they are produced by external tools and arrive with the data.
    """

    id: int
    text: str
    units: tuple[int, ...]
    perplexity: float | None = None
    intelligibility: float | None = None
    pos_tags: tuple[str, ...] | None = None


class SentencePool:
    """Id-indexed collection of sentences sharing one unit inventory."""

    def __init__(self, inventory: UnitInventory, sentences: Iterable[Sentence]):
        self.inventory = inventory
        by_id: dict[int, Sentence] = {}
        s = inventory.s
        for sent in sentences:
            if sent.id in by_id:
                raise ValidationError(f"duplicate sentence id {sent.id}")
            if not sent.units:
                raise ValidationError(f"sentence {sent.id} has an empty unit sequence")
            for u in sent.units:
                if not 0 <= u < s:
                    raise ValidationError(
                        f"sentence {sent.id} references unit index {u} outside inventory of size {s}"
                    )
            by_id[sent.id] = sent
        self._by_id = by_id

    def get(self, sentence_id: int) -> Sentence:
        try:
            return self._by_id[sentence_id]
        except KeyError:
            raise ValidationError(f"unknown sentence id {sentence_id}") from None

    def ids(self) -> tuple[int, ...]:
        return tuple(self._by_id)

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self._by_id.values())

    def __contains__(self, sentence_id: int) -> bool:
        return sentence_id in self._by_id


@dataclass(frozen=True)
class DistributionVector:
    """Nonnegative unit-count histogram over an inventory of size s.

    Counts are stored as reals so the same type serves raw corpus counts and
    weighted variants; cosine similarity is scale-invariant so vectors are
    never normalized in place.
    """

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError("distribution counts must be one-dimensional")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValidationError("distribution counts must be finite and nonnegative")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    def __len__(self) -> int:
        return len(self.counts)

    def __add__(self, other: "DistributionVector") -> "DistributionVector":
        if len(self) != len(other):
            raise ValidationError(
                f"distribution length mismatch: {len(self)} vs {len(other)}"
            )
        return DistributionVector(self.counts + other.counts)

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.counts))


@dataclass(frozen=True)
class FitnessWeights:
    """Weights for the three fitness components.

    w1 scales the whole-script distribution similarity, w2 the unit coverage
    fraction, w3 the mean per-set distribution similarity.
    """

    w1: float = 1.0
    w2: float = 2.0
    w3: float = 1.0

    def __post_init__(self):
        for name in ("w1", "w2", "w3"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise ValidationError(f"weight {name} must be finite and nonnegative")
        if self.w1 == 0 and self.w2 == 0 and self.w3 == 0:
            raise ValidationError("at least one fitness weight must be positive")


@dataclass(frozen=True)
class Script:
    """An ordered collection of sentence-id sets; the unit the optimizer evolves.

    Shape is (n_s sets, n sentences per set). No sentence id may appear twice
    anywhere in the script.
    """

    sets: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(
            self, "sets", tuple(tuple(int(i) for i in group) for group in self.sets)
        )

    @property
    def shape(self) -> tuple[int, int]:
        n_s = len(self.sets)
        n = len(self.sets[0]) if n_s else 0
        return (n_s, n)

    def all_ids(self) -> tuple[int, ...]:
        return tuple(i for group in self.sets for i in group)

    def __contains__(self, sentence_id: int) -> bool:
        return any(sentence_id in group for group in self.sets)


def validate_script(script: Script, pool: SentencePool) -> None:
    """Check shape, duplicate and resolution invariants.

    Raises :class:`ValidationError` naming the exact duplicate id or the
    offending set length; returns None when the script is valid.
    """
    if not script.sets:
        raise ValidationError("script has no sets")
    n = len(script.sets[0])
    if n == 0:
        raise ValidationError("script sets are empty (set length 0)")
    seen: set[int] = set()
    for set_index, group in enumerate(script.sets):
        if len(group) != n:
            raise ValidationError(
                f"set {set_index} has length {len(group)}, expected {n}"
            )
        for sid in group:
            if sid in seen:
                raise ValidationError(f"duplicate sentence id {sid} in script")
            if sid not in pool:
                raise ValidationError(f"unknown sentence id {sid} in script")
            seen.add(sid)


def unit_histogram(sentence_ids: Iterable[int], pool: SentencePool) -> DistributionVector:
    """Accumulate the unit-count histogram of the listed sentences.

    counts[u] is the total number of occurrences of unit u across all listed
    sentences' unit sequences. Unknown ids raise a resolution error naming
    the id.
    """
    s = pool.inventory.s
    ids = list(sentence_ids)
    if not ids:
        return DistributionVector(np.zeros(s))
    chunks = [np.asarray(pool.get(sid).units, dtype=np.intp) for sid in ids]
    counts = np.bincount(np.concatenate(chunks), minlength=s)
    return DistributionVector(counts.astype(np.float64))
