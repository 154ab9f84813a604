"""Loading candidate pools and reference corpora from line-delimited files.

Record format: one JSON object per line with fields ``text`` (string) and
``units`` (array of unit label strings), plus optional ``perplexity``
(number), ``intelligibility`` (number in [0, 1]) and ``pos`` (array of tag
strings). The unit inventory is built from the candidate file in order of
first appearance; ids are dense integers assigned in acceptance order, so
identical file bytes always produce an identical pool.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .model import DistributionVector, Sentence, SentencePool, UnitInventory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CandidateRecord:
    """One parsed input record, before id assignment."""

    text: str
    units: tuple[str, ...]
    perplexity: float | None = None
    intelligibility: float | None = None
    pos: tuple[str, ...] | None = None


@dataclass(frozen=True)
class RejectedLine:
    """A malformed input line, reported instead of aborting the load."""

    line_no: int
    reason: str
    raw: str


@dataclass(frozen=True)
class RealDistribution:
    """A reference unit distribution plus bookkeeping from its computation.

    ``unknown`` counts unit tokens that fell outside the inventory; they are
    reported rather than silently dropped. ``empty`` flags an input with no
    unit tokens at all.
    """

    vector: DistributionVector
    unknown: int = 0
    empty: bool = False


def _parse_record(obj: object) -> CandidateRecord:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    text = obj.get("text", "")
    if not isinstance(text, str):
        raise ValueError("field 'text' must be a string")
    units = obj.get("units")
    if not isinstance(units, list) or not units:
        raise ValueError("field 'units' must be a non-empty array")
    if not all(isinstance(u, str) for u in units):
        raise ValueError("field 'units' must contain only strings")

    def number(name: str, low: float | None = None, high: float | None = None):
        value = obj.get(name)
        if value is None:
            return None
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"field {name!r} must be a number")
        value = float(value)
        if low is not None and value < low:
            raise ValueError(f"field {name!r} must be >= {low}")
        if high is not None and value > high:
            raise ValueError(f"field {name!r} must be <= {high}")
        return value

    pos = obj.get("pos")
    if pos is not None:
        if not isinstance(pos, list) or not all(isinstance(t, str) for t in pos):
            raise ValueError("field 'pos' must be an array of strings")
        pos = tuple(pos)
    return CandidateRecord(
        text=text,
        units=tuple(units),
        perplexity=number("perplexity", low=0.0),
        intelligibility=number("intelligibility", low=0.0, high=1.0),
        pos=pos,
    )


def iter_records(path: str | Path):
    """Yield (line_no, record-or-None, reason, raw) for each line of a record file."""
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            yield line_no, None, "empty line", raw
            continue
        try:
            record = _parse_record(json.loads(raw))
        except (json.JSONDecodeError, ValueError) as exc:
            yield line_no, None, str(exc), raw
            continue
        yield line_no, record, "", raw


def load_pool(path: str | Path) -> tuple[SentencePool, list[RejectedLine]]:
    """Load a candidate pool from a line-delimited record file.

    Well-formed records become sentences with dense ids in file order;
    malformed lines are returned as rejects with their line numbers. A file
    with zero valid records is an error.
    """
    labels: list[str] = []
    label_index: dict[str, int] = {}
    sentences: list[Sentence] = []
    rejects: list[RejectedLine] = []
    for line_no, record, reason, raw in iter_records(path):
        if record is None:
            rejects.append(RejectedLine(line_no, reason, raw))
            continue
        unit_ixs = []
        for label in record.units:
            ix = label_index.get(label)
            if ix is None:
                ix = len(labels)
                labels.append(label)
                label_index[label] = ix
            unit_ixs.append(ix)
        sentences.append(
            Sentence(
                id=len(sentences),
                text=record.text,
                units=tuple(unit_ixs),
                perplexity=record.perplexity,
                intelligibility=record.intelligibility,
                pos_tags=record.pos,
            )
        )
    if not sentences:
        raise DataError(f"no valid records in {path}")
    pool = SentencePool(UnitInventory(labels), sentences)
    if rejects:
        logger.warning("%s: rejected %d malformed line(s)", path, len(rejects))
    return pool, rejects


def write_pool(path: str | Path, pool: SentencePool) -> None:
    """Serialize a pool back to the line-delimited record format, in id order."""
    labels = pool.inventory.labels
    lines = []
    for sent in pool:
        obj: dict = {"text": sent.text, "units": [labels[u] for u in sent.units]}
        if sent.perplexity is not None:
            obj["perplexity"] = sent.perplexity
        if sent.intelligibility is not None:
            obj["intelligibility"] = sent.intelligibility
        if sent.pos_tags is not None:
            obj["pos"] = list(sent.pos_tags)
        lines.append(json.dumps(obj, ensure_ascii=False))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def compute_real_distribution(
    corpus_path: str | Path, inventory: UnitInventory
) -> RealDistribution:
    """Count inventory units across a reference corpus file.

    The corpus uses the same record format (``text`` optional). Units absent
    from the inventory are tallied as unknown. An empty corpus yields an
    all-zero vector with the ``empty`` flag set.
    """
    counts = np.zeros(inventory.s, dtype=np.float64)
    unknown = 0
    total = 0
    for line_no, record, reason, _raw in iter_records(corpus_path):
        if record is None:
            raise DataError(f"{corpus_path}:{line_no}: {reason}")
        for label in record.units:
            total += 1
            ix = inventory.index.get(label)
            if ix is None:
                unknown += 1
            else:
                counts[ix] += 1.0
    empty = total == 0
    if empty:
        logger.warning("%s: corpus contains no unit tokens", corpus_path)
    if unknown:
        logger.warning(
            "%s: %d unit token(s) outside the %d-label inventory",
            corpus_path,
            unknown,
            inventory.s,
        )
    return RealDistribution(DistributionVector(counts), unknown=unknown, empty=empty)


def save_distribution(
    path: str | Path, inventory: UnitInventory, vector: DistributionVector
) -> None:
    """Persist a distribution snapshot as pairwise-aligned labels and counts."""
    if len(vector) != inventory.s:
        raise DataError(
            f"distribution length {len(vector)} does not match inventory size {inventory.s}"
        )
    obj = {"labels": list(inventory.labels), "counts": [float(c) for c in vector.counts]}
    Path(path).write_text(json.dumps(obj, ensure_ascii=False), encoding="utf-8")


def load_distribution(path: str | Path, inventory: UnitInventory) -> RealDistribution:
    """Reload a snapshot, projecting it onto the given inventory.

    Labels missing from the snapshot get count 0; snapshot labels outside the
    inventory are tallied as unknown mass (by total count).
    """
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid distribution snapshot: {exc}") from exc
    labels = obj.get("labels")
    raw_counts = obj.get("counts")
    if (
        not isinstance(labels, list)
        or not isinstance(raw_counts, list)
        or len(labels) != len(raw_counts)
    ):
        raise DataError(f"{path}: snapshot must hold aligned 'labels' and 'counts' arrays")
    counts = np.zeros(inventory.s, dtype=np.float64)
    unknown = 0
    for label, count in zip(labels, raw_counts):
        ix = inventory.index.get(label)
        if ix is None:
            unknown += int(count)
        else:
            counts[ix] += float(count)
    if unknown:
        logger.warning("%s: dropped %d counts outside the inventory", path, unknown)
    return RealDistribution(
        DistributionVector(counts), unknown=unknown, empty=not counts.any()
    )
