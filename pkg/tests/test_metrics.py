import math
import random
from functools import lru_cache

import pytest
from sklearn.metrics import cohen_kappa_score

from radstruct.metrics import (
    bleu_corpus,
    cohen_kappa,
    exact_match,
    exact_match_from_counts,
    recompose_bleu,
    rouge_l,
    rouge_n,
    score_corpus,
    tokenize_canonical,
    tokenize_simple,
)
from radstruct.reportql import parse_report


# -- independent oracles ------------------------------------------------------


def clipped_overlap_oracle(cand, ref, n):
    """Exhaustive clipped n-gram overlap by naive nested loops."""
    cand_ngrams = [tuple(cand[i : i + n]) for i in range(len(cand) - n + 1)]
    ref_ngrams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
    overlap = 0
    for gram in set(cand_ngrams):
        overlap += min(cand_ngrams.count(gram), ref_ngrams.count(gram))
    return overlap, len(cand_ngrams), len(ref_ngrams)


def lcs_oracle(a, b):
    """Top-down memoized LCS, independent of the production DP."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def rec(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + rec(i + 1, j + 1)
        return max(rec(i + 1, j), rec(i, j + 1))

    return rec(0, 0)


def rand_tokens(rng, max_len=12, vocab="abcde"):
    return [rng.choice(vocab) for _ in range(rng.randint(0, max_len))]


# -- tokenizers ---------------------------------------------------------------


def test_tokenize_simple():
    assert tokenize_simple("The liver is Normal") == ["the", "liver", "is", "normal"]
    assert tokenize_simple("") == []
    assert tokenize_simple("a  b") == ["a", "b"]


def test_tokenize_canonical():
    assert tokenize_canonical("7 mm.") == ["7", "mm", "."]
    assert tokenize_canonical("up-to") == ["up", "-", "to"]
    text = "no punctuation here"
    assert tokenize_canonical(text) == tokenize_simple(text)


# -- rouge --------------------------------------------------------------------


def test_rouge1_hand_example():
    score = rouge_n("the liver is normal".split(), "the liver is enlarged".split(), 1)
    assert score.precision == score.recall == score.f1 == 0.75


def test_rouge2_hand_example():
    score = rouge_n(list("abcd"), list("abce"), 2)
    assert score.precision == pytest.approx(2 / 3)
    assert score.recall == pytest.approx(2 / 3)
    assert score.f1 == pytest.approx(2 / 3)


def test_rouge_identity():
    for n in (1, 2):
        score = rouge_n(list("abcd"), list("abcd"), n)
        assert score.precision == score.recall == score.f1 == 1.0
    score = rouge_l(list("abcd"), list("abcd"))
    assert score.precision == score.recall == score.f1 == 1.0


def test_rouge_l_hand_example():
    score = rouge_l(["a", "c", "b", "d"], ["a", "b", "c", "d"])
    assert score.precision == score.recall == score.f1 == 0.75


def test_rouge_l_disjoint():
    score = rouge_l(list("ab"), list("cd"))
    assert score.precision == score.recall == score.f1 == 0.0


def test_rouge_n_matches_oracle():
    rng = random.Random(1)
    for _ in range(500):
        cand, ref = rand_tokens(rng), rand_tokens(rng)
        for n in (1, 2):
            overlap, n_cand, n_ref = clipped_overlap_oracle(cand, ref, n)
            score = rouge_n(cand, ref, n)
            assert score.precision == pytest.approx(overlap / max(1, n_cand), abs=1e-9)
            assert score.recall == pytest.approx(overlap / max(1, n_ref), abs=1e-9)


def test_rouge_l_matches_oracle():
    rng = random.Random(2)
    for _ in range(500):
        cand = rand_tokens(rng, max_len=15)
        ref = rand_tokens(rng, max_len=15)
        lcs = lcs_oracle(cand, ref)
        score = rouge_l(cand, ref)
        assert score.precision == (lcs / len(cand) if cand else 0.0)
        assert score.recall == (lcs / len(ref) if ref else 0.0)


def test_rouge_symmetry():
    rng = random.Random(3)
    for _ in range(200):
        a, b = rand_tokens(rng), rand_tokens(rng)
        for n in (1, 2):
            assert rouge_n(a, b, n).precision == rouge_n(b, a, n).recall
        assert rouge_l(a, b).precision == rouge_l(b, a).recall


# -- bleu ---------------------------------------------------------------------


def test_bleu_identity():
    corpus = [list("abcd"), list("efghi")]
    score = bleu_corpus(corpus, corpus)
    assert score.score == 1.0
    assert score.brevity_penalty == 1.0
    assert all(p == 1.0 for p in score.precisions)


def test_bleu_brevity_hand_example():
    score = bleu_corpus([["the", "cat"]], [["the", "cat", "is", "here"]], max_order=2)
    assert score.precisions == (1.0, 1.0)
    assert score.brevity_penalty == pytest.approx(math.exp(-1))
    assert score.score == pytest.approx(math.exp(-1))
    assert score.length_ratio == 0.5


def test_bleu_recomposition_reported_rows():
    # published component rows: recomposition of BP x geometric mean
    assert recompose_bleu(0.99, [0.85, 0.76, 0.68, 0.60]) == pytest.approx(0.710, abs=0.005)
    assert recompose_bleu(1.0, [0.84, 0.76, 0.69, 0.62]) == pytest.approx(0.723, abs=0.02)


def test_bleu_matches_oracle():
    rng = random.Random(4)
    for _ in range(200):
        n_pairs = rng.randint(1, 4)
        cands = [rand_tokens(rng) for _ in range(n_pairs)]
        refs = [rand_tokens(rng) for _ in range(n_pairs)]
        if sum(len(r) for r in refs) == 0:
            continue
        score = bleu_corpus(cands, refs)
        matched = [0] * 4
        totals = [0] * 4
        for cand, ref in zip(cands, refs):
            for n in range(1, 5):
                o, c, _ = clipped_overlap_oracle(cand, ref, n)
                matched[n - 1] += o
                totals[n - 1] += c
        for i in range(4):
            expected = matched[i] / totals[i] if totals[i] else 0.0
            assert score.precisions[i] == pytest.approx(expected, abs=1e-9)
        ratio = sum(len(c) for c in cands) / sum(len(r) for r in refs)
        bp = 1.0 if ratio >= 1 else (0.0 if ratio == 0 else math.exp(1 - 1 / ratio))
        assert score.brevity_penalty == pytest.approx(bp, abs=1e-9)


def test_bleu_recomposition_law():
    rng = random.Random(6)
    for _ in range(200):
        cands = [rand_tokens(rng, vocab="ab") + ["x"] * 4]
        refs = [rand_tokens(rng, vocab="ab") + ["x"] * 4]
        score = bleu_corpus(cands, refs)
        if all(p > 0 for p in score.precisions):
            expected = score.brevity_penalty * math.exp(
                sum(math.log(p) for p in score.precisions) / 4
            )
            assert score.score == pytest.approx(expected, abs=1e-9)


def test_bleu_input_validation():
    with pytest.raises(ValueError, match="mismatch"):
        bleu_corpus([list("ab")], [])
    with pytest.raises(ValueError, match="empty"):
        bleu_corpus([], [])


# -- exact match --------------------------------------------------------------


def _doc(text):
    return parse_report(text)[0]


def test_exact_match_identity(table1_text):
    score = exact_match(_doc(table1_text), _doc(table1_text))
    assert score.precision == score.recall == score.f1 == 1.0


def test_exact_match_dropped_pair():
    gold = _doc("liver { size { normal } echogenicity { normal } lesion { no } bile duct { no } }")
    pred = _doc("liver { size { normal } echogenicity { normal } bile duct { no } }")
    score = exact_match(pred, gold)
    assert score.precision == 1.0
    assert score.recall == 0.75
    assert score.f1 == pytest.approx(0.857, abs=1e-3)


def test_exact_match_empty_pred():
    score = exact_match(_doc(""), _doc("liver { size { normal } }"))
    assert score.precision == 1.0  # vacuous
    assert score.recall == 0.0
    assert score.f1 == 0.0


def test_exact_match_sibling_reordering():
    a = _doc("liver { size { normal } lesion { no } } spleen { size { normal } }")
    b = _doc("spleen { size { normal } } liver { lesion { no } size { normal } }")
    score = exact_match(a, b)
    assert score.precision == score.recall == 1.0


# -- kappa --------------------------------------------------------------------


def test_kappa_identical():
    assert cohen_kappa(list("aabb"), list("aabb")) == 1.0


def test_kappa_hand_fixture():
    a = ["yes"] * 4 + ["no"] * 4 + ["yes", "no"]
    b = ["yes"] * 4 + ["no"] * 4 + ["no", "yes"]
    assert cohen_kappa(a, b) == pytest.approx(0.6, abs=1e-12)


def test_kappa_independent_labels_near_zero():
    rng = random.Random(8)
    n = 10000
    a = [rng.choice("xy") for _ in range(n)]
    b = [rng.choice("xy") for _ in range(n)]
    assert abs(cohen_kappa(a, b)) < 0.05


def test_kappa_matches_sklearn():
    rng = random.Random(9)
    for _ in range(50):
        n = rng.randint(2, 40)
        a = [rng.choice("pqr") for _ in range(n)]
        b = [rng.choice("pqr") for _ in range(n)]
        try:
            expected = cohen_kappa_score(a, b)
        except Exception:
            continue
        if math.isnan(expected):
            continue
        assert cohen_kappa(a, b) == pytest.approx(expected, abs=1e-9)


def test_kappa_relabeling_invariance():
    rng = random.Random(10)
    mapping = {"p": "z", "q": "w", "r": "v"}
    a = [rng.choice("pqr") for _ in range(100)]
    b = [rng.choice("pqr") for _ in range(100)]
    assert cohen_kappa(a, b) == pytest.approx(
        cohen_kappa([mapping[x] for x in a], [mapping[x] for x in b]), abs=1e-12
    )


def test_kappa_degenerate_single_label():
    assert cohen_kappa(["x", "x"], ["x", "x"]) == 1.0


def test_kappa_input_validation():
    with pytest.raises(ValueError):
        cohen_kappa([], [])
    with pytest.raises(ValueError):
        cohen_kappa(["a"], ["a", "b"])


# -- score_corpus -------------------------------------------------------------


def test_score_corpus_identity(table1_text):
    report = score_corpus([table1_text], [table1_text])
    d = report.to_json_dict()
    for key in ("rouge1", "rouge2", "rougeL", "bleu", "bleu_canonical", "exact_match_f1"):
        assert d[key] == 1.0


def test_score_corpus_single_pair_rouge():
    report = score_corpus(["the liver is normal"], ["the liver is enlarged"])
    assert report.rouge1.f1 == 0.75


def test_score_corpus_unparseable_prediction_lowers_recall():
    golds = ["liver { size { normal } }", "spleen { size { normal } }"]
    good = ["liver { size { normal } }", "spleen { size { normal } }"]
    bad = ["liver { size { normal } }", "spleen { size {"]
    full = score_corpus(good, golds)
    broken = score_corpus(bad, golds)
    assert broken.exact_match.recall < full.exact_match.recall


def test_score_corpus_mismatched_lengths():
    with pytest.raises(ValueError):
        score_corpus(["a"], ["a", "b"])
    with pytest.raises(ValueError):
        score_corpus([], [])


def test_score_corpus_pooled_variant(table1_text):
    pooled = score_corpus([table1_text], [table1_text], pooled_rouge=True)
    assert pooled.rouge1.f1 == 1.0


def test_metric_ranges_fuzz():
    rng = random.Random(11)
    for _ in range(2000):
        cand, ref = rand_tokens(rng), rand_tokens(rng)
        for score in (rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)):
            assert 0.0 <= score.precision <= 1.0
            assert 0.0 <= score.recall <= 1.0
            assert 0.0 <= score.f1 <= 1.0
        if ref:
            bleu = bleu_corpus([cand], [ref])
            assert 0.0 <= bleu.score <= 1.0
            assert 0.0 <= bleu.brevity_penalty <= 1.0
            assert all(0.0 <= p <= 1.0 for p in bleu.precisions)


def test_exact_match_count_conventions():
    score = exact_match_from_counts(0, 0, 0)
    assert score.precision == score.recall == 1.0
