import json
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import FIXTURES, fake_sidecar, random_tokens
from mtcrit.corpus import SegmentRecord, SourceLabel
from mtcrit.metrics import (
    BleuConfig,
    EmbeddingSet,
    EmbeddingSidecar,
    MatcherStage,
    MetricError,
    MetricVector,
    bertscore,
    bleu,
    bleu_corpus,
    google_bleu,
    google_bleu_stats,
    lcs_length,
    levenshtein,
    meteor,
    ngram_precision_recall,
    rescale,
    rouge_l,
    score_corpus,
    score_record,
    synonym_matcher,
    ter,
)

TOKS = st.lists(st.sampled_from("abcdef"), min_size=0, max_size=10)
NONEMPTY = st.lists(st.sampled_from("abcdef"), min_size=1, max_size=10)


def is_close(a, b, tol=1e-9):
    return abs(a - b) <= tol


# ---------------------------------------------------------------------------
# Frozen oracle-derived fixtures

with open(FIXTURES / "derived_metrics.json", encoding="utf-8") as fh:
    _DERIVED = json.load(fh)


def _run_fixture_case(case: dict) -> float:
    op = case["op"]
    if op == "ngram_precision":
        return ngram_precision_recall(case["hyp"], case["ref"], case["n"])[0]
    if op == "bleu":
        config = BleuConfig(max_n=case["max_n"], smoothing=case["smoothing"])
        return bleu(case["hyp"], case["refs"], config)
    if op == "google_bleu":
        return google_bleu(case["hyp"], case["ref"])
    if op == "rouge_l":
        return rouge_l(case["hyp"], case["ref"])
    if op == "meteor":
        return meteor(case["hyp"], case["ref"])
    if op == "ter":
        return ter(case["hyp"], case["ref"])
    if op == "bertscore":
        hyp = EmbeddingSet([f"h{i}" for i in range(len(case["hyp_vectors"]))], case["hyp_vectors"])
        ref = EmbeddingSet([f"r{i}" for i in range(len(case["ref_vectors"]))], case["ref_vectors"])
        return bertscore(hyp, ref)[2]
    if op == "rescale":
        return rescale(case["raw"], case["baseline"])
    raise AssertionError(f"unknown fixture op {op}")


@pytest.mark.parametrize("name", sorted(_DERIVED["cases"]))
def test_derived_fixture(name):
    case = _DERIVED["cases"][name]
    assert is_close(_run_fixture_case(case), case["expected"], _DERIVED["tolerance"])


# ---------------------------------------------------------------------------
# n-gram precision / recall

class TestNgramPrecisionRecall:
    def test_identity(self):
        assert ngram_precision_recall("the cat sat".split(), "the cat sat".split(), 1) == (1.0, 1.0)

    def test_clipping(self):
        p, r = ngram_precision_recall(
            "the the the the the the the".split(), "the cat is on the mat".split(), 1
        )
        assert p == 2 / 7
        assert r == 2 / 6

    def test_disjoint(self):
        assert ngram_precision_recall("a b".split(), "c d".split(), 1) == (0.0, 0.0)

    def test_zero_denominators(self):
        assert ngram_precision_recall([], ["a"], 1) == (0.0, 0.0)
        assert ngram_precision_recall(["a"], ["a"], 2) == (0.0, 0.0)


# ---------------------------------------------------------------------------
# BLEU

class TestBleu:
    def test_identity(self):
        s = "the cat sat on the mat".split()
        assert bleu(s, [s]) == 1.0

    def test_empty_hypothesis(self):
        assert bleu([], ["a b".split()]) == 0.0

    def test_requires_reference(self):
        with pytest.raises(MetricError):
            bleu(["a"], [])

    def test_closest_ref_length_tie_prefers_shorter(self):
        hyp = "a b c".split()
        refs = ["a b".split(), "a b c d".split()]  # both distance 1
        score = bleu(hyp, refs, BleuConfig(max_n=1, smoothing="none"))
        # r=2 (shorter tie): BP = 1, p1 = 3/3 clipped to max ref counts = 3/3
        assert score == 1.0

    def test_smoothing_only_on_zero_orders(self):
        # p1 nonzero unsmoothed, p2 zero -> add-one on order 2 only
        hyp = "a x".split()
        ref = "a y".split()
        score = bleu(hyp, ref and [ref])
        p1 = Fraction(1, 2)
        p2 = Fraction(0 + 1, 1 + 1)
        p3 = p4 = Fraction(1)  # zero-length windows, smoothed to 1/1
        expected = float(p1 * p2 * p3 * p4) ** 0.25
        assert is_close(score, expected)

    def test_unsmoothed_zero_precision_zeroes_score(self):
        assert bleu("a b".split(), ["a c".split()], BleuConfig(max_n=2, smoothing="none")) == 0.0

    def test_corpus_single_segment_equals_sentence(self):
        rng = random.Random(11)
        for _ in range(50):
            hyp = random_tokens(rng, 0, 8)
            ref = random_tokens(rng, 1, 8)
            for smoothing in ("none", "add_one_on_zero"):
                config = BleuConfig(smoothing=smoothing)
                assert bleu_corpus([(hyp, [ref])], config) == bleu(hyp, [ref], config)

    def test_corpus_aggregates_counts(self):
        pairs = [("a b".split(), ["a b".split()]), ("c d".split(), ["c x".split()])]
        config = BleuConfig(max_n=1, smoothing="none")
        # pooled: numerator 2+1, denominator 2+2, lengths 4/4
        assert bleu_corpus(pairs, config) == 3 / 4

    @given(NONEMPTY)
    @settings(max_examples=200)
    def test_identity_property(self, toks):
        assert bleu(toks, [toks]) == 1.0

    @given(TOKS, NONEMPTY)
    @settings(max_examples=200)
    def test_bounds(self, hyp, ref):
        assert 0.0 <= bleu(hyp, [ref]) <= 1.0


# ---------------------------------------------------------------------------
# GoogleBLEU

class TestGoogleBleu:
    def test_identity(self):
        assert google_bleu("a b c".split(), "a b c".split()) == 1.0

    def test_min_of_precision_recall(self):
        assert google_bleu("a b".split(), "a b c".split()) == 0.5

    def test_disjoint(self):
        assert google_bleu("a b".split(), "c d".split()) == 0.0

    def test_both_empty(self):
        assert google_bleu([], []) == 1.0

    def test_one_empty(self):
        assert google_bleu([], ["a"]) == 0.0
        assert google_bleu(["a"], []) == 0.0

    @given(TOKS, TOKS)
    @settings(max_examples=200)
    def test_score_leq_precision_and_recall(self, hyp, ref):
        p, r, score = google_bleu_stats(hyp, ref)
        assert score <= p and score <= r
        assert 0.0 <= score <= 1.0


# ---------------------------------------------------------------------------
# ROUGE-L

class TestRougeL:
    def test_identity(self):
        assert rouge_l("a b c d".split(), "a b c d".split()) == 1.0

    def test_crossing_order(self):
        assert rouge_l("a b c d".split(), "a c b d".split()) == 0.75

    def test_disjoint(self):
        assert rouge_l("a b".split(), "c d".split()) == 0.0

    def test_empty(self):
        assert rouge_l([], ["a"]) == 0.0
        assert rouge_l(["a"], []) == 0.0

    @given(NONEMPTY)
    @settings(max_examples=200)
    def test_identity_property(self, toks):
        assert rouge_l(toks, toks) == 1.0

    @given(TOKS, TOKS)
    @settings(max_examples=200)
    def test_bounds(self, hyp, ref):
        assert 0.0 <= rouge_l(hyp, ref) <= 1.0


# ---------------------------------------------------------------------------
# METEOR

class TestMeteor:
    def test_identity_four_tokens(self):
        assert meteor("a b c d".split(), "a b c d".split()) == 0.9921875

    def test_stem_stage_match(self):
        assert meteor(["cats"], ["cat"]) == 0.5

    def test_no_matches(self):
        assert meteor("a b".split(), "c d".split()) == 0.0

    def test_empty_sides(self):
        assert meteor([], []) == 0.0
        assert meteor([], ["a"]) == 0.0

    def test_synonym_stage(self):
        table = {"sad": "unhappy-group", "unhappy": "unhappy-group"}
        matchers = (synonym_matcher(table),)
        # single synonym match: Fmean = 1, penalty = 0.5
        assert meteor(["sad"], ["unhappy"], matchers) == 0.5

    def test_synonym_default_disabled(self):
        assert meteor(["sad"], ["unhappy"]) == 0.0

    def test_fragmented_vs_contiguous(self):
        ref = "a b c d".split()
        contiguous = meteor("a b c d".split(), ref)
        fragmented = meteor("a c b d".split(), ref)
        assert fragmented < contiguous

    def test_alignment_prefers_run_continuation(self):
        # "c a b" against "a b c a b": following c@3 with a@4, b@5 keeps one chunk
        score = meteor("c a b".split(), "a b c a b".split())
        p, r = Fraction(1), Fraction(3, 5)
        fmean = 10 * p * r / (r + 9 * p)
        expected = fmean * (1 - Fraction(1, 2) * Fraction(1, 3) ** 3)
        assert is_close(score, float(expected))

    @given(NONEMPTY)
    @settings(max_examples=200)
    def test_identity_property(self, toks):
        expected = 1.0 - 0.5 / len(toks) ** 3
        assert is_close(meteor(toks, toks), expected, 1e-12)

    @given(TOKS, TOKS)
    @settings(max_examples=200)
    def test_bounds(self, hyp, ref):
        assert 0.0 <= meteor(hyp, ref) <= 1.0


# ---------------------------------------------------------------------------
# TER

class TestTer:
    def test_identity(self):
        assert ter("a b".split(), "a b".split()) == 0.0

    def test_insertion(self):
        assert ter("a b d".split(), "a b c d".split()) == 0.25

    def test_shift(self):
        assert ter("c a b d".split(), "a b c d".split()) == 0.25

    def test_empty_reference_rejected(self):
        with pytest.raises(MetricError):
            ter(["a"], [])

    def test_empty_hypothesis(self):
        assert ter([], "a b".split()) == 1.0

    def test_can_exceed_one(self):
        assert ter("x y z w".split(), ["a"]) > 1.0

    def test_swap_fixed_by_one_shift(self):
        assert ter("b a".split(), "a b".split()) == 0.5

    def test_shift_block_must_match_reference(self):
        # moving "x" (absent from ref) would reach distance 2, but only
        # ref-matching blocks may move: best is shift "a" + one deletion
        assert ter("b x a".split(), "a b".split()) == 1.0

    @given(NONEMPTY)
    @settings(max_examples=200)
    def test_identity_property(self, toks):
        assert ter(toks, toks) == 0.0

    @given(TOKS, NONEMPTY)
    @settings(max_examples=200)
    def test_never_worse_than_levenshtein(self, hyp, ref):
        assert ter(hyp, ref) <= levenshtein(hyp, ref) / len(ref)

    @given(TOKS, NONEMPTY)
    @settings(max_examples=200)
    def test_non_negative(self, hyp, ref):
        assert ter(hyp, ref) >= 0.0


# ---------------------------------------------------------------------------
# BERTScore and rescaling

def unit(*v):
    arr = np.asarray(v, dtype=float)
    return (arr / np.linalg.norm(arr)).tolist()


class TestBertscore:
    def test_self_similarity(self):
        emb = EmbeddingSet(["a", "b"], [unit(1, 2, 3), unit(-1, 0, 1)])
        p, r, f1 = bertscore(emb, emb)
        assert is_close(p, 1.0) and is_close(r, 1.0) and is_close(f1, 1.0)

    def test_orthogonal_vectors(self):
        hyp = EmbeddingSet(["a"], [[1.0, 0.0]])
        ref = EmbeddingSet(["b"], [[0.0, 1.0]])
        assert bertscore(hyp, ref) == (0.0, 0.0, 0.0)

    def test_negative_cosine_clamped(self):
        hyp = EmbeddingSet(["a"], [[1.0, 0.0]])
        ref = EmbeddingSet(["b"], [[-1.0, 0.0]])
        assert bertscore(hyp, ref) == (0.0, 0.0, 0.0)

    def test_permutation_invariance(self):
        rng = random.Random(3)
        tokens = ["t0", "t1", "t2", "t3"]
        vectors = [[rng.uniform(-1, 1) for _ in range(5)] for _ in tokens]
        ref = EmbeddingSet(["r0", "r1"], [[rng.uniform(-1, 1) for _ in range(5)] for _ in range(2)])
        base = bertscore(EmbeddingSet(tokens, vectors), ref)
        for _ in range(5):
            perm = list(range(4))
            rng.shuffle(perm)
            shuffled = EmbeddingSet([tokens[i] for i in perm], [vectors[i] for i in perm])
            assert bertscore(shuffled, ref) == base

    def test_zero_norm_rejected(self):
        with pytest.raises(MetricError):
            EmbeddingSet(["a"], [[0.0, 0.0]])

    def test_count_mismatch_rejected(self):
        with pytest.raises(MetricError):
            EmbeddingSet(["a", "b"], [[1.0, 0.0]])

    def test_dim_mismatch_rejected(self):
        with pytest.raises(MetricError):
            bertscore(EmbeddingSet(["a"], [[1.0]]), EmbeddingSet(["b"], [[1.0, 0.0]]))

    def test_empty_rejected(self):
        emb = EmbeddingSet(["a"], [[1.0]])
        with pytest.raises(MetricError):
            bertscore(EmbeddingSet([], np.zeros((0, 1))), emb)


class TestRescale:
    def test_midpoint(self):
        assert is_close(rescale(0.91, 0.82), 0.5)

    def test_fixed_points(self):
        assert rescale(0.82, 0.82) == 0.0
        assert rescale(1.0, 0.3) == 1.0

    def test_negative_result(self):
        assert rescale(0.1, 0.5) < 0.0

    def test_baseline_at_or_above_one_rejected(self):
        with pytest.raises(MetricError):
            rescale(0.5, 1.0)


# ---------------------------------------------------------------------------
# MetricVector and per-record scoring

class TestMetricVector:
    def test_bounds_validated(self):
        with pytest.raises(MetricError):
            MetricVector(sacrebleu=1.2, meteor=0, rouge_l=0, ter=0, google_bleu=0)
        with pytest.raises(MetricError):
            MetricVector(sacrebleu=0, meteor=0, rouge_l=0, ter=-0.1, google_bleu=0)

    def test_ter_may_exceed_one(self):
        vec = MetricVector(sacrebleu=0, meteor=0, rouge_l=0, ter=2.5, google_bleu=0)
        assert vec.ter == 2.5

    def test_rescaled_requires_bertscore(self):
        with pytest.raises(MetricError):
            MetricVector(sacrebleu=0, meteor=0, rouge_l=0, ter=0, google_bleu=0,
                         bertscore_rescaled=0.1)

    def test_round_trip(self):
        vec = MetricVector(sacrebleu=0.5, meteor=0.5, rouge_l=0.5, ter=0.5,
                           google_bleu=0.5, bertscore=0.9, bertscore_rescaled=-0.2)
        assert MetricVector.from_dict(vec.to_dict()) == vec


def record(rid, mt, ref=None, **kw):
    return SegmentRecord(id=rid, source_text="س", gold_label=SourceLabel.DEPRESSION,
                         mt_text=mt, reference_text=ref, **kw)


class TestScoreRecord:
    def test_identity_record(self):
        vec = score_record(record("r", "the cat sat", "the cat sat"))
        assert vec.sacrebleu == 1.0
        assert vec.rouge_l == 1.0
        assert vec.google_bleu == 1.0
        assert vec.ter == 0.0
        assert vec.meteor == 1.0 - 0.5 / 27

    def test_missing_reference_names_record(self):
        with pytest.raises(MetricError) as err:
            score_record(record("r77", "x"))
        assert "r77" in str(err.value)

    def test_feel_tight_regression(self):
        # hyp [i, feel, tight] vs ref [i, have, anxiety]: single unigram match
        vec = score_record(record("r", "I feel tight", "I have anxiety"))
        p1, p_smoothed2, p_smoothed3, p_smoothed4 = (
            Fraction(1, 3), Fraction(1, 3), Fraction(1, 2), Fraction(1, 1),
        )
        assert is_close(vec.sacrebleu, float(p1 * p_smoothed2 * p_smoothed3 * p_smoothed4) ** 0.25)
        assert is_close(vec.rouge_l, 1 / 3)
        assert is_close(vec.google_bleu, 1 / 6)
        assert is_close(vec.meteor, 1 / 6)
        assert is_close(vec.ter, 2 / 3)
        assert vec.bertscore is None

    def test_normalization_applied(self):
        # case and punctuation placement do not hide an exact match
        vec = score_record(record("r", "I KILL myself!", "i kill myself !"))
        assert vec.ter == 0.0
        assert vec.sacrebleu == 1.0

    def test_reference_without_tokens_rejected(self):
        with pytest.raises(MetricError):
            score_record(record("r", "x", "   "))


class TestScoreCorpus:
    def test_orders_by_record_id_and_skips_unreferenced(self, mini_corpus):
        pairs = score_corpus(mini_corpus)
        ids = [rec.id for rec, _ in pairs]
        assert ids == sorted(ids)
        assert len(pairs) == 10  # fillers t11/t12 carry no reference

    def test_parallel_matches_serial(self, mini_corpus):
        serial = score_corpus(mini_corpus)
        parallel = score_corpus(mini_corpus, workers=4)
        assert [(r.id, v) for r, v in serial] == [(r.id, v) for r, v in parallel]

    def test_sidecar_supplies_bertscore(self, mini_corpus):
        sidecar = fake_sidecar(mini_corpus)
        pairs = score_corpus(mini_corpus, sidecar)
        for _, vec in pairs:
            assert vec.bertscore is not None
            assert 0.0 <= vec.bertscore <= 1.0
            assert vec.bertscore_rescaled == rescale(vec.bertscore, sidecar.rescale_baseline)

    def test_sidecar_round_trip(self, tmp_path, mini_corpus):
        sidecar = fake_sidecar(mini_corpus)
        path = tmp_path / "emb.jsonl"
        sidecar.save(path)
        again = EmbeddingSidecar.load(path)
        assert again.dim == sidecar.dim
        assert again.rescale_baseline == sidecar.rescale_baseline
        assert again.records == sidecar.records

    def test_sidecar_count_mismatch_rejected(self, mini_corpus):
        sidecar = fake_sidecar(mini_corpus)
        rec = mini_corpus.by_id("t01")
        hyp, ref = sidecar.records["t01"]
        sidecar.records["t01"] = (hyp[:-1], ref)
        with pytest.raises(MetricError) as err:
            sidecar.embedding_sets(rec)
        assert "t01" in str(err.value)
