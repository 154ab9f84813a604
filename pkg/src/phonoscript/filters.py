"""Five-filter cascade reducing a raw pool to candidate sentences.

Filters run in the order: general (length + character class), sensitive
words, POS criteria, perplexity, intelligibility. Model-derived scores
(perplexity, intelligibility) are consumed from annotations, never computed
here. Each removed sentence is attributed to the first filter that rejected
it, which makes reports deterministic.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import ConfigError, DataError, ValidationError
from .model import Sentence, SentencePool

FILTER_ORDER = ("general", "sensitive", "pos", "perplexity", "intelligibility")

# CJK Unified Ideographs plus extension A and compatibility block.
_HAN_RE = re.compile(r"[㐀-䶿一-鿿豈-﫿]")

CHARSET_PREDICATES: dict[str, Callable[[str], bool]] = {
    "han": lambda ch: bool(_HAN_RE.match(ch)),
    "any": lambda ch: True,
}


@dataclass(frozen=True)
class PosCriteria:
    """Banned tag sets: anywhere in the sentence, at the start, at the end."""

    include_banned: frozenset[str] = frozenset()
    start_banned: frozenset[str] = frozenset()
    end_banned: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "include_banned", frozenset(self.include_banned))
        object.__setattr__(self, "start_banned", frozenset(self.start_banned))
        object.__setattr__(self, "end_banned", frozenset(self.end_banned))


@dataclass(frozen=True)
class FilterConfig:
    """Cascade configuration.

    ``required_length``, ``perplexity_threshold`` and
    ``intelligibility_threshold`` may each be None to disable that check.
    ``charset`` names a character-class rule from :data:`CHARSET_PREDICATES`.
    Multiple POS criteria sets are applied conjunctively: a sentence is
    rejected if any configured set rejects it.
    """

    required_length: int | None = 10
    charset: str = "han"
    sensitive_words: frozenset[str] = frozenset()
    pos_criteria: tuple[PosCriteria, ...] = ()
    perplexity_threshold: float | None = 4.0
    intelligibility_threshold: float | None = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sensitive_words", frozenset(self.sensitive_words))
        object.__setattr__(self, "pos_criteria", tuple(self.pos_criteria))
        if self.required_length is not None and self.required_length < 1:
            raise ConfigError("required_length must be >= 1")
        if self.charset not in CHARSET_PREDICATES:
            raise ConfigError(
                f"unknown charset rule {self.charset!r}; choose from {sorted(CHARSET_PREDICATES)}"
            )
        for name in ("perplexity_threshold", "intelligibility_threshold"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")


@dataclass
class FilterReport:
    """Removal accounting for one pipeline run.

    ``rejected_by`` maps each removed sentence id to the first filter that
    rejected it; ``removed`` aggregates counts per filter. ``untagged`` lists
    sentences that passed the POS stage only because they carry no tags.
    """

    input_size: int = 0
    removed: dict[str, int] = field(default_factory=lambda: {k: 0 for k in FILTER_ORDER})
    rejected_by: dict[int, str] = field(default_factory=dict)
    untagged: list[int] = field(default_factory=list)

    @property
    def survivors(self) -> int:
        return self.input_size - len(self.rejected_by)

    def to_dict(self) -> dict:
        return {
            "input": self.input_size,
            "survivors": self.survivors,
            "removed": dict(self.removed),
            "untagged": list(self.untagged),
            "rejected_by": {str(k): v for k, v in sorted(self.rejected_by.items())},
        }


def general_filter(sentence: Sentence, cfg: FilterConfig) -> bool:
    """Keep iff the text has the required character count and charset."""
    if cfg.required_length is not None and len(sentence.text) != cfg.required_length:
        return False
    predicate = CHARSET_PREDICATES[cfg.charset]
    return all(predicate(ch) for ch in sentence.text)


def sensitive_filter(sentence: Sentence, words: frozenset[str] | set[str]) -> bool:
    """Keep unless any listed word occurs as a contiguous substring."""
    return not any(word and word in sentence.text for word in words)


def pos_filter(sentence: Sentence, criteria: PosCriteria) -> bool:
    """Keep unless a banned tag occurs (anywhere / first / last).

    Sentences without POS tags pass; the pipeline marks them as untagged
    rather than dropping them, since tagging coverage varies by toolkit.
    """
    tags = sentence.pos_tags
    if not tags:
        return True
    if any(tag in criteria.include_banned for tag in tags):
        return False
    if tags[0] in criteria.start_banned:
        return False
    if tags[-1] in criteria.end_banned:
        return False
    return True


def perplexity_filter(sentence: Sentence, threshold: float) -> bool:
    """Keep iff the annotated perplexity does not exceed the threshold.

    The boundary is keep-on-equal: only strictly higher perplexities are
    removed. A missing annotation is a configuration error, because silently
    passing unscored sentences would corrupt the candidate pool.
    """
    if sentence.perplexity is None:
        raise ConfigError(
            f"sentence {sentence.id} has no perplexity annotation required by the perplexity filter"
        )
    return sentence.perplexity <= threshold


def levenshtein(a: str, b: str) -> int:
    """Minimum edit distance with unit-cost insert/delete/substitute over characters."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost))
        previous = current
    return previous[-1]


def intelligibility_score(original: str, prediction: str) -> float:
    """1 minus the edit distance from the prediction, relative to the original length.

    A perfect prediction scores 1.0. Predictions longer than the original can
    push the raw value below zero, so the score is clamped at 0.
    """
    if not original:
        raise ValidationError("intelligibility score requires a non-empty original string")
    score = 1.0 - levenshtein(original, prediction) / len(original)
    return max(0.0, score)


def _intelligibility_keep(sentence: Sentence, threshold: float) -> bool:
    if sentence.intelligibility is None:
        raise ConfigError(
            f"sentence {sentence.id} has no intelligibility annotation required by the intelligibility filter"
        )
    return sentence.intelligibility >= threshold


def run_pipeline(pool: SentencePool, cfg: FilterConfig) -> tuple[SentencePool, FilterReport]:
    """Apply the filter cascade and return the surviving pool plus a report.

    Each sentence is attributed to the first filter that rejects it; the
    report satisfies removed + survivors == input size.
    """
    report = FilterReport(input_size=len(pool))
    survivors: list[Sentence] = []
    for sentence in pool:
        verdict = _first_rejecting_filter(sentence, cfg, report)
        if verdict is None:
            survivors.append(sentence)
        else:
            report.removed[verdict] += 1
            report.rejected_by[sentence.id] = verdict
    filtered = SentencePool(pool.inventory, survivors)
    return filtered, report


def _first_rejecting_filter(
    sentence: Sentence, cfg: FilterConfig, report: FilterReport
) -> str | None:
    if not general_filter(sentence, cfg):
        return "general"
    if not sensitive_filter(sentence, cfg.sensitive_words):
        return "sensitive"
    if cfg.pos_criteria:
        if not sentence.pos_tags:
            report.untagged.append(sentence.id)
        elif not all(pos_filter(sentence, criteria) for criteria in cfg.pos_criteria):
            return "pos"
    if cfg.perplexity_threshold is not None:
        if not perplexity_filter(sentence, cfg.perplexity_threshold):
            return "perplexity"
    if cfg.intelligibility_threshold is not None:
        if not _intelligibility_keep(sentence, cfg.intelligibility_threshold):
            return "intelligibility"
    return None


def load_sensitive_words(path: str | Path) -> frozenset[str]:
    """Read a sensitive-word list: one word per line, UTF-8, blanks ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        word = line.strip()
        if word:
            words.add(word)
    return frozenset(words)


def load_pos_criteria(path: str | Path) -> tuple[PosCriteria, ...]:
    """Read POS criteria from a JSON file.

    Accepts a single object or an array of objects, each with string arrays
    ``include``, ``start`` and ``end``.
    """
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not valid JSON: {exc}") from exc
    entries = obj if isinstance(obj, list) else [obj]
    criteria = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise DataError(f"{path}: criteria entry {i} is not an object")
        sets = {}
        for key in ("include", "start", "end"):
            value = entry.get(key, [])
            if not isinstance(value, list) or not all(isinstance(t, str) for t in value):
                raise DataError(f"{path}: criteria field {key!r} must be an array of strings")
            sets[key] = frozenset(value)
        criteria.append(
            PosCriteria(
                include_banned=sets["include"],
                start_banned=sets["start"],
                end_banned=sets["end"],
            )
        )
    return tuple(criteria)
