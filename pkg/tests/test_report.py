import csv

import numpy as np
import pytest

from phonoscript import (
    DistributionVector,
    FitnessWeights,
    Script,
    Sentence,
    SentencePool,
    UnitInventory,
    ValidationError,
    compare_scripts,
    export_distribution,
    fitness,
    script_stats,
    unit_histogram,
)
from phonoscript.report import render_breakdown, render_stats

from oracles import naive_fitness
from synth import make_pool, random_script


class TestScriptStats:
    def test_base_vs_tonal_coverage(self):
        inv = UnitInventory(["ma1", "ma3", "de5"])
        pool = SentencePool(
            inv,
            [
                Sentence(id=0, text="", units=(0, 1)),
                Sentence(id=1, text="", units=(1,)),
            ],
        )
        d_real = DistributionVector(np.array([3.0, 2.0, 1.0]))
        stats = script_stats(Script(((0, 1),)), pool, d_real)
        assert stats.tonal_syllable_coverage == 2  # ma1 and ma3
        assert stats.base_syllable_coverage == 1   # both share base "ma"

    def test_single_set_std_is_zero(self, toy_pool, toy_d_real):
        stats = script_stats(Script(((0, 1, 2),)), toy_pool, toy_d_real)
        assert stats.set_distribution_std == 0.0

    def test_population_std_form(self):
        pool, d_real = make_pool(40, 20, seed=1)
        rng = np.random.default_rng(2)
        script = random_script(rng, pool, 4, 3)
        stats = script_stats(script, pool, d_real)
        bd = fitness(script, pool, d_real, FitnessWeights(1, 1, 1))
        per_set = np.array(bd.per_set_distribution)
        assert stats.set_distribution_std == pytest.approx(
            float(np.sqrt(((per_set - per_set.mean()) ** 2).mean())), abs=1e-12
        )

    def test_fields_match_fitness_module(self, toy_pool, toy_d_real):
        script = Script(((0, 4), (2, 6)))
        stats = script_stats(script, toy_pool, toy_d_real)
        bd = fitness(script, toy_pool, toy_d_real, FitnessWeights(1, 1, 1))
        assert stats.script_distribution == bd.script_distribution
        assert stats.set_distribution_mean == bd.set_distribution_mean
        assert stats.tonal_syllable_coverage == round(bd.coverage * toy_pool.inventory.s)
        hist = unit_histogram(script.all_ids(), toy_pool)
        assert np.array_equal(stats.histogram.counts, hist.counts)

    def test_matches_naive_oracle(self, toy_pool, toy_d_real):
        script = Script(((1, 3), (5, 7)))
        stats = script_stats(script, toy_pool, toy_d_real)
        sd, cov, sm, _ = naive_fitness(script, toy_pool, toy_d_real, FitnessWeights(1, 1, 1))
        assert stats.script_distribution == pytest.approx(sd, abs=1e-12)
        assert stats.set_distribution_mean == pytest.approx(sm, abs=1e-12)
        assert stats.tonal_syllable_coverage == round(cov * toy_pool.inventory.s)

    def test_render_lists_all_fields(self, toy_pool, toy_d_real):
        stats = script_stats(Script(((0, 1),)), toy_pool, toy_d_real)
        text = render_stats(stats)
        for key in (
            "base_syllable_coverage",
            "tonal_syllable_coverage",
            "script_distribution",
            "set_distribution_mean",
            "set_distribution_std",
        ):
            assert key in text


class TestCompareScripts:
    def test_identity_gives_zero_deltas(self, toy_pool, toy_d_real):
        stats = script_stats(Script(((0, 1), (2, 3))), toy_pool, toy_d_real)
        comparison = compare_scripts(stats, stats)
        assert all(delta == 0 for _, _, _, delta in comparison.rows)

    def test_deltas_are_differences(self, toy_pool, toy_d_real):
        a = script_stats(Script(((0, 1),)), toy_pool, toy_d_real)
        b = script_stats(Script(((2, 3),)), toy_pool, toy_d_real)
        comparison = compare_scripts(a, b)
        for name, va, vb, delta in comparison.rows:
            assert delta == pytest.approx(vb - va)
        assert "base_syllable_coverage" in comparison.format()

    def test_coverage_delta_example(self):
        # formatting example: coverages 668 vs 1120 must show +452
        pool, d_real = make_pool(10, 20, seed=3)
        stats = script_stats(Script(((0, 1),)), pool, d_real)
        import dataclasses

        a = dataclasses.replace(stats, tonal_syllable_coverage=668)
        b = dataclasses.replace(stats, tonal_syllable_coverage=1120)
        row = dict((r[0], r) for r in compare_scripts(a, b).rows)["tonal_syllable_coverage"]
        assert row[3] == 452

    def test_inventory_mismatch_rejected(self, toy_pool, toy_d_real):
        stats = script_stats(Script(((0, 1),)), toy_pool, toy_d_real)
        other_pool, other_d = make_pool(10, 7, seed=4)
        other = script_stats(Script(((0, 1),)), other_pool, other_d)
        with pytest.raises(ValidationError):
            compare_scripts(stats, other)


class TestExportDistribution:
    def test_rows_sorted_by_descending_real_count(self, tmp_path, toy_pool, toy_d_real):
        hist = unit_histogram([0, 1, 2], toy_pool)
        path = tmp_path / "dist.csv"
        export_distribution(toy_pool.inventory, hist, toy_d_real, path)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == toy_pool.inventory.s
        reals = [float(r["real_count"]) for r in rows]
        assert reals == sorted(reals, reverse=True)

    def test_roundtrip_restores_vectors(self, tmp_path, toy_pool, toy_d_real):
        hist = unit_histogram([3, 4, 5], toy_pool)
        path = tmp_path / "dist.csv"
        export_distribution(toy_pool.inventory, hist, toy_d_real, path)
        script_back = np.zeros(toy_pool.inventory.s)
        real_back = np.zeros(toy_pool.inventory.s)
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                ix = toy_pool.inventory.index[row["unit"]]
                script_back[ix] = float(row["script_count"])
                real_back[ix] = float(row["real_count"])
        assert np.array_equal(script_back, hist.counts)
        assert np.array_equal(real_back, toy_d_real.counts)

    def test_empty_script_keeps_real_counts(self, tmp_path, toy_pool, toy_d_real):
        zero = unit_histogram([], toy_pool)
        path = tmp_path / "dist.csv"
        export_distribution(toy_pool.inventory, zero, toy_d_real, path)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        assert all(float(r["script_count"]) == 0 for r in rows)
        assert sum(float(r["real_count"]) for r in rows) == toy_d_real.total

    def test_byte_deterministic(self, tmp_path, toy_pool, toy_d_real):
        hist = unit_histogram([0, 1], toy_pool)
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        export_distribution(toy_pool.inventory, hist, toy_d_real, p1)
        export_distribution(toy_pool.inventory, hist, toy_d_real, p2)
        assert p1.read_bytes() == p2.read_bytes()


def test_render_breakdown_lists_components(toy_pool, toy_d_real):
    bd = fitness(Script(((0, 1), (2, 3))), toy_pool, toy_d_real, FitnessWeights(1, 2, 1))
    text = render_breakdown(bd)
    assert "total:" in text
    assert "set_distribution[1]:" in text
