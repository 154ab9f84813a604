import json

import numpy as np
import pytest

from phonoscript import (
    DataError,
    compute_real_distribution,
    load_distribution,
    load_pool,
    save_distribution,
    unit_histogram,
    write_pool,
)


def _write(tmp_path, name, lines):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _rec(text="x", units=("ma1",), **extra):
    obj = {"text": text, "units": list(units)}
    obj.update(extra)
    return json.dumps(obj, ensure_ascii=False)


def test_load_pool_happy_path(tmp_path):
    path = _write(
        tmp_path,
        "pool.jsonl",
        [_rec(units=["ma1", "de5"]), _rec(units=["shi4"]), _rec(units=["ma1"])],
    )
    pool, rejects = load_pool(path)
    assert len(pool) == 3
    assert rejects == []
    assert pool.ids() == (0, 1, 2)


def test_load_pool_reports_malformed_line(tmp_path):
    path = _write(
        tmp_path,
        "pool.jsonl",
        [_rec(), _rec(), "{not json"],
    )
    pool, rejects = load_pool(path)
    assert len(pool) == 2
    assert [r.line_no for r in rejects] == [3]


def test_load_pool_shared_label_once(tmp_path):
    path = _write(tmp_path, "pool.jsonl", [_rec(units=["ma1", "de5"]), _rec(units=["ma1"])])
    pool, _ = load_pool(path)
    assert pool.inventory.labels.count("ma1") == 1
    assert pool.inventory.labels == ("ma1", "de5")


def test_load_pool_line_accounting(tmp_path):
    lines = [_rec(), "", _rec(units=[]), _rec(), json.dumps({"units": ["a"], "perplexity": -1})]
    path = _write(tmp_path, "pool.jsonl", lines)
    pool, rejects = load_pool(path)
    assert len(pool) + len(rejects) == len(lines)
    assert len(pool) == 2


def test_load_pool_deterministic(tmp_path):
    lines = [_rec(units=["b2", "a1"]), _rec(units=["c3", "a1"])]
    path = _write(tmp_path, "pool.jsonl", lines)
    pool1, _ = load_pool(path)
    pool2, _ = load_pool(path)
    assert pool1.inventory.labels == pool2.inventory.labels == ("b2", "a1", "c3")
    assert [s.id for s in pool1] == [s.id for s in pool2]


def test_load_pool_empty_is_error(tmp_path):
    path = _write(tmp_path, "pool.jsonl", ["{broken"])
    with pytest.raises(DataError, match="no valid records"):
        load_pool(path)


def test_load_pool_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_pool(tmp_path / "absent.jsonl")


def test_annotations_parsed(tmp_path):
    path = _write(
        tmp_path,
        "pool.jsonl",
        [_rec(perplexity=2.5, intelligibility=1.0, pos=["Na", "VC"])],
    )
    pool, _ = load_pool(path)
    sent = pool.get(0)
    assert sent.perplexity == 2.5
    assert sent.intelligibility == 1.0
    assert sent.pos_tags == ("Na", "VC")


def test_write_pool_roundtrip(tmp_path):
    path = _write(
        tmp_path,
        "pool.jsonl",
        [_rec(text="alpha", units=["ma1", "ma1"], perplexity=1.25), _rec(text="beta", units=["de5"])],
    )
    pool, _ = load_pool(path)
    out = tmp_path / "copy.jsonl"
    write_pool(out, pool)
    pool2, rejects = load_pool(out)
    assert rejects == []
    assert [s.text for s in pool2] == [s.text for s in pool]
    assert [s.units for s in pool2] == [s.units for s in pool]
    assert pool2.get(0).perplexity == 1.25


def test_real_distribution_of_pool_matches_histogram(tmp_path):
    lines = [_rec(units=["ma1", "de5"]), _rec(units=["de5", "shi4", "de5"])]
    path = _write(tmp_path, "pool.jsonl", lines)
    pool, _ = load_pool(path)
    result = compute_real_distribution(path, pool.inventory)
    expected = unit_histogram(pool.ids(), pool)
    assert np.array_equal(result.vector.counts, expected.counts)
    assert result.unknown == 0 and not result.empty


def test_real_distribution_direct_count(tmp_path):
    pool_path = _write(tmp_path, "pool.jsonl", [_rec(units=["de5"])])
    pool, _ = load_pool(pool_path)
    corpus = _write(tmp_path, "corpus.jsonl", [json.dumps({"units": ["de5", "de5"]})])
    result = compute_real_distribution(corpus, pool.inventory)
    assert result.vector.counts[pool.inventory.index["de5"]] == 2


def test_real_distribution_thousand_lines_vs_naive(tmp_path):
    rng = np.random.default_rng(17)
    labels = [f"u{i}" for i in range(30)]
    pool_path = _write(tmp_path, "pool.jsonl", [_rec(units=labels)])
    pool, _ = load_pool(pool_path)
    naive: dict[str, int] = {}
    lines = []
    for _ in range(1000):
        units = [labels[int(i)] for i in rng.integers(0, 30, size=rng.integers(1, 12))]
        for u in units:
            naive[u] = naive.get(u, 0) + 1
        lines.append(json.dumps({"units": units}))
    corpus = _write(tmp_path, "corpus.jsonl", lines)
    result = compute_real_distribution(corpus, pool.inventory)
    for label, ix in pool.inventory.index.items():
        assert result.vector.counts[ix] == naive.get(label, 0)


def test_real_distribution_unknown_tally(tmp_path):
    pool_path = _write(tmp_path, "pool.jsonl", [_rec(units=["a1"])])
    pool, _ = load_pool(pool_path)
    corpus = _write(tmp_path, "corpus.jsonl", [json.dumps({"units": ["a1", "zz9", "zz9"]})])
    result = compute_real_distribution(corpus, pool.inventory)
    assert result.unknown == 2
    assert result.vector.total == 1


def test_snapshot_roundtrip(tmp_path):
    pool_path = _write(tmp_path, "pool.jsonl", [_rec(units=["a1", "b2", "c3"])])
    pool, _ = load_pool(pool_path)
    vec = unit_histogram(pool.ids(), pool)
    snap = tmp_path / "dreal.json"
    save_distribution(snap, pool.inventory, vec)
    loaded = load_distribution(snap, pool.inventory)
    assert np.array_equal(loaded.vector.counts, vec.counts)
    assert loaded.unknown == 0


def test_snapshot_projection(tmp_path):
    pool_path = _write(tmp_path, "pool.jsonl", [_rec(units=["a1", "b2"])])
    pool, _ = load_pool(pool_path)
    snap = tmp_path / "dreal.json"
    snap.write_text(json.dumps({"labels": ["b2", "qq7"], "counts": [5, 3]}), encoding="utf-8")
    loaded = load_distribution(snap, pool.inventory)
    assert loaded.vector.counts[pool.inventory.index["a1"]] == 0
    assert loaded.vector.counts[pool.inventory.index["b2"]] == 5
    assert loaded.unknown == 3
