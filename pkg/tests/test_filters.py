import pytest
from hypothesis import given, strategies as st

from phonoscript import (
    ConfigError,
    FilterConfig,
    PosCriteria,
    Sentence,
    SentencePool,
    UnitInventory,
    ValidationError,
    general_filter,
    intelligibility_score,
    levenshtein,
    perplexity_filter,
    pos_filter,
    run_pipeline,
    sensitive_filter,
)

from oracles import naive_levenshtein

HAN10 = "我們出門去看山水風景"  # ten Han characters
BANNED10 = "我們出門去看打架表演"  # contains the banned word
CKIP = PosCriteria(
    include_banned={"Nb", "Nc", "FW"},
    start_banned={"DE", "SHI", "T"},
    end_banned={"Caa", "Cab", "Cba", "Cbb", "P", "T"},
)


def _sent(text, sid=0, **kw):
    return Sentence(id=sid, text=text, units=(0,), **kw)


class TestGeneralFilter:
    def test_ten_han_characters_kept(self):
        assert general_filter(_sent(HAN10), FilterConfig())

    def test_nine_characters_rejected(self):
        assert not general_filter(_sent(HAN10[:9]), FilterConfig())

    def test_latin_character_rejected(self):
        assert not general_filter(_sent(HAN10[:9] + "a"), FilterConfig())

    def test_disabled_checks_pass_anything(self):
        cfg = FilterConfig(required_length=None, charset="any")
        assert general_filter(_sent("short ascii!"), cfg)


class TestSensitiveFilter:
    def test_empty_word_set_keeps(self):
        assert sensitive_filter(_sent(HAN10), frozenset())

    def test_contained_word_rejects(self):
        assert not sensitive_filter(_sent(BANNED10), frozenset({"打架"}))

    def test_substring_semantics(self):
        # characters present but not contiguous: keep
        assert sensitive_filter(_sent(HAN10), frozenset({"我門"}))


class TestPosFilter:
    def test_banned_include_tag_rejects(self):
        assert not pos_filter(_sent("x", pos_tags=("Na", "Nb", "VC")), CKIP)

    def test_banned_start_tag_rejects(self):
        assert not pos_filter(_sent("x", pos_tags=("DE", "Na")), CKIP)

    def test_banned_end_tag_rejects(self):
        assert not pos_filter(_sent("x", pos_tags=("Na", "P")), CKIP)

    def test_clean_tags_kept(self):
        # Na/VC/Na hits no banned set: not in include, start, or end lists
        assert pos_filter(_sent("x", pos_tags=("Na", "VC", "Na")), CKIP)

    def test_untagged_passes_through(self):
        assert pos_filter(_sent("x"), CKIP)


class TestPerplexityFilter:
    def test_above_threshold_rejected(self):
        assert not perplexity_filter(_sent("x", perplexity=4.5), 4.0)

    def test_boundary_kept(self):
        assert perplexity_filter(_sent("x", perplexity=4.0), 4.0)

    def test_typical_value_kept(self):
        assert perplexity_filter(_sent("x", perplexity=2.336), 4.0)

    def test_missing_annotation_errors_with_id(self):
        with pytest.raises(ConfigError, match="sentence 7"):
            perplexity_filter(_sent("x", sid=7), 4.0)


class TestIntelligibilityScore:
    def test_identical_strings(self):
        assert intelligibility_score(HAN10, HAN10) == 1.0

    def test_single_substitution_on_ten_chars(self):
        pred = HAN10[:4] + "錯" + HAN10[5:]
        assert intelligibility_score(HAN10, pred) == pytest.approx(0.9)

    def test_empty_prediction_clamps_to_zero(self):
        assert intelligibility_score("abc", "") == 0.0

    def test_longer_prediction_clamps_to_zero(self):
        assert intelligibility_score("ab", "wxyz") == 0.0

    def test_empty_original_is_error(self):
        with pytest.raises(ValidationError):
            intelligibility_score("", "abc")

    @given(st.text(min_size=1, max_size=12))
    def test_self_score_is_one(self, text):
        assert intelligibility_score(text, text) == 1.0


class TestLevenshtein:
    def test_all_inserts(self):
        assert levenshtein("", "abc") == 3

    def test_kitten_sitting(self):
        assert levenshtein("kitten", "sitting") == 3
        assert naive_levenshtein("kitten", "sitting") == 3

    def test_identity(self):
        assert levenshtein(HAN10, HAN10) == 0

    @given(st.text(alphabet="abc", max_size=8), st.text(alphabet="abc", max_size=8))
    def test_matches_full_matrix_oracle(self, a, b):
        assert levenshtein(a, b) == naive_levenshtein(a, b)

    @given(
        st.text(alphabet="abcd", max_size=6),
        st.text(alphabet="abcd", max_size=6),
        st.text(alphabet="abcd", max_size=6),
    )
    def test_metric_properties(self, a, b, c):
        assert levenshtein(a, b) == levenshtein(b, a)
        assert levenshtein(a, a) == 0
        assert levenshtein(a, b) <= max(len(a), len(b))
        assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


def _pipeline_pool():
    """One witness per filter plus survivors, over Han text."""
    inv = UnitInventory(["u0", "u1"])
    mk = lambda i, text, **kw: Sentence(
        id=i,
        text=text,
        units=(0, 1),
        perplexity=kw.pop("perplexity", 2.0),
        intelligibility=kw.pop("intelligibility", 1.0),
        pos_tags=kw.pop("pos_tags", ("Na", "VC")),
    )
    sentences = [
        mk(0, HAN10),                                        # survivor
        mk(1, HAN10[:9]),                                    # general: too short
        mk(2, BANNED10),                                     # sensitive word
        mk(3, HAN10, pos_tags=("Nb", "Na")),                 # pos
        mk(4, HAN10, perplexity=4.5),                        # perplexity
        mk(5, HAN10, intelligibility=0.9),                   # intelligibility
        mk(6, HAN10[::-1]),                                  # survivor
        mk(7, HAN10, perplexity=4.0),                        # boundary: kept
    ]
    return SentencePool(inv, sentences)


def _pipeline_config():
    return FilterConfig(
        required_length=10,
        charset="han",
        sensitive_words=frozenset({"打架"}),
        pos_criteria=(CKIP,),
        perplexity_threshold=4.0,
        intelligibility_threshold=1.0,
    )


class TestPipeline:
    def test_permissive_config_is_identity(self, toy_pool):
        cfg = FilterConfig(
            required_length=None,
            charset="any",
            perplexity_threshold=None,
            intelligibility_threshold=None,
        )
        filtered, report = run_pipeline(toy_pool, cfg)
        assert len(filtered) == len(toy_pool)
        assert sum(report.removed.values()) == 0

    def test_one_witness_per_filter(self):
        filtered, report = run_pipeline(_pipeline_pool(), _pipeline_config())
        assert report.removed == {
            "general": 1,
            "sensitive": 1,
            "pos": 1,
            "perplexity": 1,
            "intelligibility": 1,
        }
        assert sorted(s.id for s in filtered) == [0, 6, 7]
        assert report.survivors + sum(report.removed.values()) == report.input_size

    def test_attribution_follows_cascade_order(self):
        # violates both the length rule and the perplexity threshold
        inv = UnitInventory(["u0"])
        pool = SentencePool(
            inv,
            [Sentence(id=0, text=HAN10[:5], units=(0,), perplexity=9.0, intelligibility=1.0)],
        )
        _, report = run_pipeline(pool, _pipeline_config())
        assert report.rejected_by[0] == "general"

    def test_survivors_pass_every_filter(self):
        cfg = _pipeline_config()
        filtered, _ = run_pipeline(_pipeline_pool(), cfg)
        for sent in filtered:
            assert general_filter(sent, cfg)
            assert sensitive_filter(sent, cfg.sensitive_words)
            assert all(pos_filter(sent, c) for c in cfg.pos_criteria)
            assert perplexity_filter(sent, cfg.perplexity_threshold)
            assert sent.intelligibility >= cfg.intelligibility_threshold

    def test_order_independent_up_to_id_set(self):
        pool = _pipeline_pool()
        reversed_pool = SentencePool(pool.inventory, list(reversed(list(pool))))
        cfg = _pipeline_config()
        ids_forward = {s.id for s in run_pipeline(pool, cfg)[0]}
        ids_reverse = {s.id for s in run_pipeline(reversed_pool, cfg)[0]}
        assert ids_forward == ids_reverse

    def test_untagged_sentences_marked_not_dropped(self):
        inv = UnitInventory(["u0"])
        pool = SentencePool(
            inv,
            [Sentence(id=0, text=HAN10, units=(0,), perplexity=1.0, intelligibility=1.0)],
        )
        filtered, report = run_pipeline(pool, _pipeline_config())
        assert len(filtered) == 1
        assert report.untagged == [0]

    def test_missing_perplexity_is_hard_error(self):
        inv = UnitInventory(["u0"])
        pool = SentencePool(
            inv, [Sentence(id=3, text=HAN10, units=(0,), intelligibility=1.0)]
        )
        with pytest.raises(ConfigError, match="sentence 3"):
            run_pipeline(pool, _pipeline_config())


class TestExternalFiles:
    def test_sensitive_word_list(self, tmp_path):
        from phonoscript.filters import load_sensitive_words

        path = tmp_path / "words.txt"
        path.write_text("打架\n\n 外洩 \n", encoding="utf-8")
        assert load_sensitive_words(path) == frozenset({"打架", "外洩"})

    def test_pos_criteria_single_object(self, tmp_path):
        from phonoscript.filters import load_pos_criteria

        path = tmp_path / "pos.json"
        path.write_text(
            '{"include": ["Nb"], "start": ["DE"], "end": ["P"]}', encoding="utf-8"
        )
        (criteria,) = load_pos_criteria(path)
        assert criteria.include_banned == frozenset({"Nb"})
        assert criteria.start_banned == frozenset({"DE"})
        assert criteria.end_banned == frozenset({"P"})

    def test_pos_criteria_array_applied_conjunctively(self, tmp_path):
        from phonoscript.filters import load_pos_criteria

        path = tmp_path / "pos.json"
        path.write_text(
            '[{"include": ["Nb"], "start": [], "end": []},'
            ' {"include": ["nz"], "start": [], "end": []}]',
            encoding="utf-8",
        )
        criteria = load_pos_criteria(path)
        assert len(criteria) == 2
        # a sentence violating either configured set is rejected
        inv = UnitInventory(["u0"])
        pool = SentencePool(
            inv,
            [
                Sentence(id=0, text=HAN10, units=(0,), perplexity=1.0,
                         intelligibility=1.0, pos_tags=("Na", "nz")),
                Sentence(id=1, text=HAN10, units=(0,), perplexity=1.0,
                         intelligibility=1.0, pos_tags=("Na",)),
            ],
        )
        cfg = FilterConfig(pos_criteria=criteria, perplexity_threshold=4.0,
                           intelligibility_threshold=1.0)
        filtered, report = run_pipeline(pool, cfg)
        assert report.rejected_by.get(0) == "pos"
        assert [s.id for s in filtered] == [1]

    def test_pos_criteria_bad_file(self, tmp_path):
        from phonoscript import DataError
        from phonoscript.filters import load_pos_criteria

        path = tmp_path / "pos.json"
        path.write_text('{"include": "Nb"}', encoding="utf-8")
        with pytest.raises(DataError):
            load_pos_criteria(path)
