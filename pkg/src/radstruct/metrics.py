"""Evaluation battery: ROUGE-1/2/L, BLEU with components, key-value
exact-match over flattened reports, and Cohen's kappa.

All computations are pure and stateless. ROUGE is reported per pair and
macro-averaged by default (corpus-pooled variant behind a flag); BLEU is
corpus-level with clipped n-gram precisions and a brevity penalty.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

from .reportql import ReportDoc, diff_reports, parse_report

DEFAULT_SMOOTHING_EPSILON = 1e-9

_PUNCT_RE = re.compile(r"([^0-9a-zA-Z\s])")


def tokenize_simple(text: str) -> list[str]:
    """Lowercase and split on whitespace runs."""
    return text.lower().split()


def tokenize_canonical(text: str) -> list[str]:
    """Like tokenize_simple, but every punctuation character is its own token."""
    return _PUNCT_RE.sub(r" \1 ", text).lower().split()


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class BleuScore:
    score: float
    brevity_penalty: float
    length_ratio: float
    precisions: tuple[float, ...]


@dataclass(frozen=True)
class ExactMatchScore:
    precision: float
    recall: float
    f1: float
    matched: int
    missing: int
    spurious: int


@dataclass(frozen=True)
class ScoreReport:
    rouge1: RougeScore
    rouge2: RougeScore
    rougeL: RougeScore
    bleu: BleuScore
    bleu_canonical: BleuScore
    exact_match: ExactMatchScore
    n_reports: int

    def to_json_dict(self) -> dict:
        """Flat JSON object mirroring the reported score tables."""
        return {
            "rouge1": self.rouge1.f1,
            "rouge2": self.rouge2.f1,
            "rougeL": self.rougeL.f1,
            "bleu": self.bleu.score,
            "bleu_canonical": self.bleu_canonical.score,
            "brevity_penalty": self.bleu.brevity_penalty,
            "length_ratio": self.bleu.length_ratio,
            "precisions": list(self.bleu.precisions),
            "brevity_penalty_canonical": self.bleu_canonical.brevity_penalty,
            "length_ratio_canonical": self.bleu_canonical.length_ratio,
            "precisions_canonical": list(self.bleu_canonical.precisions),
            "exact_match_p": self.exact_match.precision,
            "exact_match_r": self.exact_match.recall,
            "exact_match_f1": self.exact_match.f1,
            "n_reports": self.n_reports,
        }


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ngram_counts(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: list[str], reference: list[str], n: int) -> RougeScore:
    """Clipped n-gram overlap ROUGE, n in {1, 2}."""
    if n not in (1, 2):
        raise ValueError(f"n must be 1 or 2, got {n}")
    cand = _ngram_counts(candidate, n)
    ref = _ngram_counts(reference, n)
    overlap = sum((cand & ref).values())
    precision = overlap / max(1, sum(cand.values()))
    recall = overlap / max(1, sum(ref.values()))
    return RougeScore(precision, recall, _f1(precision, recall))


def _lcs_length(a: list[str], b: list[str]) -> int:
    # single-row DP over the shorter sequence
    if len(b) > len(a):
        a, b = b, a
    row = [0] * (len(b) + 1)
    for x in a:
        prev = 0
        for j, y in enumerate(b, start=1):
            cur = row[j]
            row[j] = prev + 1 if x == y else max(row[j], row[j - 1])
            prev = cur
    return row[len(b)]


def rouge_l(candidate: list[str], reference: list[str]) -> RougeScore:
    """Longest-common-subsequence ROUGE."""
    lcs = _lcs_length(candidate, reference)
    precision = lcs / len(candidate) if candidate else 0.0
    recall = lcs / len(reference) if reference else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def bleu_corpus(
    candidates: list[list[str]],
    references: list[list[str]],
    max_order: int = 4,
    smoothing_epsilon: float = DEFAULT_SMOOTHING_EPSILON,
) -> BleuScore:
    """Corpus-level BLEU with clipped precisions and brevity penalty.

    Zero precision counts are replaced by smoothing_epsilon before the log;
    brevity_penalty = 1 when the candidate/reference length ratio >= 1,
    exp(1 - 1/ratio) otherwise.
    """
    if len(candidates) != len(references):
        raise ValueError(
            f"corpus size mismatch: {len(candidates)} candidates vs {len(references)} references"
        )
    if not candidates:
        raise ValueError("empty corpus")
    if max_order < 1:
        raise ValueError("max_order must be >= 1")

    matched = [0] * max_order
    totals = [0] * max_order
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, max_order + 1):
            cand_ngrams = _ngram_counts(cand, n)
            ref_ngrams = _ngram_counts(ref, n)
            matched[n - 1] += sum((cand_ngrams & ref_ngrams).values())
            totals[n - 1] += sum(cand_ngrams.values())

    precisions = tuple(
        matched[i] / totals[i] if totals[i] > 0 else 0.0 for i in range(max_order)
    )
    length_ratio = cand_len / ref_len if ref_len > 0 else float("inf")
    if length_ratio >= 1.0:
        brevity_penalty = 1.0
    elif cand_len == 0:
        brevity_penalty = 0.0
    else:
        brevity_penalty = math.exp(1.0 - 1.0 / length_ratio)
    score = recompose_bleu(brevity_penalty, precisions, smoothing_epsilon)
    return BleuScore(score, brevity_penalty, length_ratio, precisions)


def recompose_bleu(
    brevity_penalty: float,
    precisions: tuple[float, ...] | list[float],
    smoothing_epsilon: float = DEFAULT_SMOOTHING_EPSILON,
) -> float:
    """BP times the geometric mean of the (smoothed) precisions."""
    smoothed = [p if p > 0.0 else smoothing_epsilon for p in precisions]
    log_mean = sum(math.log(p) for p in smoothed) / len(smoothed)
    return brevity_penalty * math.exp(log_mean)


def exact_match_from_counts(matched: int, missing: int, spurious: int) -> ExactMatchScore:
    precision = matched / (matched + spurious) if matched + spurious > 0 else 1.0
    recall = matched / (matched + missing) if matched + missing > 0 else 1.0
    return ExactMatchScore(precision, recall, _f1(precision, recall), matched, missing, spurious)


def exact_match(pred: ReportDoc, gold: ReportDoc) -> ExactMatchScore:
    """Key-value exact-match over flattened (path, value) multisets."""
    m, miss, spur = diff_reports(pred, gold)
    return exact_match_from_counts(len(m), len(miss), len(spur))


def cohen_kappa(labels_a: list[str], labels_b: list[str]) -> float:
    """Chance-corrected agreement between two annotators.

    kappa = (p_o - p_e) / (1 - p_e); returns 1.0 in the degenerate case
    where both p_e and p_o equal 1 (a single shared label).
    """
    if len(labels_a) != len(labels_b):
        raise ValueError(f"label sequences differ in length: {len(labels_a)} vs {len(labels_b)}")
    if not labels_a:
        raise ValueError("empty label sequences")
    n = len(labels_a)
    p_o = sum(a == b for a, b in zip(labels_a, labels_b)) / n
    counts_a = Counter(labels_a)
    counts_b = Counter(labels_b)
    p_e = sum(counts_a[label] * counts_b.get(label, 0) for label in counts_a) / (n * n)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1.0 - p_e)


def score_corpus(
    preds: list[str],
    golds: list[str],
    pooled_rouge: bool = False,
    smoothing_epsilon: float = DEFAULT_SMOOTHING_EPSILON,
) -> ScoreReport:
    """Full score battery over aligned prediction/gold text corpora.

    ROUGE is computed per pair on whitespace tokens and macro-averaged
    (or corpus-pooled when pooled_rouge is set). BLEU is corpus-level,
    once with whitespace tokens and once with the punctuation-splitting
    tokenizer. Exact-match pools flattened-pair diff counts across pairs;
    a prediction that fails to parse as ReportQL counts every gold pair
    as missing.
    """
    if len(preds) != len(golds):
        raise ValueError(f"corpus size mismatch: {len(preds)} preds vs {len(golds)} golds")
    if not preds:
        raise ValueError("empty corpus")

    simple_pairs = [(tokenize_simple(p), tokenize_simple(g)) for p, g in zip(preds, golds)]
    rouge1 = _aggregate_rouge(simple_pairs, lambda c, r: rouge_n(c, r, 1), 1, pooled_rouge)
    rouge2 = _aggregate_rouge(simple_pairs, lambda c, r: rouge_n(c, r, 2), 2, pooled_rouge)
    rougeL = _aggregate_rouge(simple_pairs, rouge_l, None, pooled_rouge)

    bleu = bleu_corpus([c for c, _ in simple_pairs], [r for _, r in simple_pairs],
                       smoothing_epsilon=smoothing_epsilon)
    bleu_canon = bleu_corpus(
        [tokenize_canonical(p) for p in preds],
        [tokenize_canonical(g) for g in golds],
        smoothing_epsilon=smoothing_epsilon,
    )

    matched = missing = spurious = 0
    for pred_text, gold_text in zip(preds, golds):
        gold_doc, _ = parse_report(gold_text)
        try:
            pred_doc, _ = parse_report(pred_text)
        except ValueError:
            from .reportql import flatten

            missing += len(flatten(gold_doc)[0])
            continue
        m, miss, spur = diff_reports(pred_doc, gold_doc)
        matched += len(m)
        missing += len(miss)
        spurious += len(spur)

    return ScoreReport(
        rouge1=rouge1,
        rouge2=rouge2,
        rougeL=rougeL,
        bleu=bleu,
        bleu_canonical=bleu_canon,
        exact_match=exact_match_from_counts(matched, missing, spurious),
        n_reports=len(preds),
    )


def _aggregate_rouge(pairs, scorer, n: int | None, pooled: bool) -> RougeScore:
    if not pooled:
        scores = [scorer(c, r) for c, r in pairs]
        k = len(scores)
        return RougeScore(
            sum(s.precision for s in scores) / k,
            sum(s.recall for s in scores) / k,
            sum(s.f1 for s in scores) / k,
        )
    # pooled: sum overlap and totals across the corpus, then divide once
    overlap_sum = 0
    cand_total = 0
    ref_total = 0
    for cand, ref in pairs:
        if n is not None:
            cand_counts = _ngram_counts(cand, n)
            ref_counts = _ngram_counts(ref, n)
            overlap_sum += sum((cand_counts & ref_counts).values())
            cand_total += sum(cand_counts.values())
            ref_total += sum(ref_counts.values())
        else:
            overlap_sum += _lcs_length(cand, ref)
            cand_total += len(cand)
            ref_total += len(ref)
    precision = overlap_sum / max(1, cand_total)
    recall = overlap_sum / max(1, ref_total)
    return RougeScore(precision, recall, _f1(precision, recall))
