"""Span-masking pre-training pairs from unlabeled report text.

For a token list, contiguous spans totalling approximately rate * n tokens
are replaced in the input by numbered sentinel tokens; the target lists
each sentinel followed by the tokens it hides. Splicing the target back
into the input (`reconstruct`) recovers the original sequence exactly.

Randomness comes from Python's `random.Random` (Mersenne Twister), which
is stable across platforms and versions for the methods used here, so a
(tokens, rate, mean_span_len, seed) tuple always yields the same example.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass

SENTINEL_PREFIX = "<extra_id_"


@dataclass(frozen=True)
class MaskedExample:
    input_tokens: tuple[str, ...]
    target_tokens: tuple[str, ...]
    n_spans: int
    seed: int
    sentinel_prefix: str = SENTINEL_PREFIX

    def is_sentinel(self, token: str) -> bool:
        return (
            token.startswith(self.sentinel_prefix)
            and token.endswith(">")
            and token[len(self.sentinel_prefix) : -1].isdigit()
        )


def _sentinel_prefix_for(tokens: list[str]) -> str:
    # extend the prefix until no input token can be mistaken for a sentinel
    prefix = SENTINEL_PREFIX
    while any(t.startswith(prefix) for t in tokens):
        prefix = "<x" + prefix[1:]
    return prefix


def corrupt(tokens: list[str], rate: float, mean_span_len: float = 3.0,
            seed: int = 0) -> MaskedExample:
    """Mask random spans covering ~rate of the tokens; deterministic per seed.

    Span lengths are geometric around mean_span_len, truncated to the
    remaining budget; spans are placed so that at least one kept token
    separates them, except at rate 1.0 where everything collapses into a
    single span.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    if mean_span_len <= 0:
        raise ValueError(f"mean_span_len must be > 0, got {mean_span_len}")
    if rate > 0 and not tokens:
        raise ValueError("tokens must be non-empty when rate > 0")

    prefix = _sentinel_prefix_for(tokens)
    n = len(tokens)
    n_mask = round(rate * n)
    if rate > 0:
        n_mask = max(1, min(n, n_mask))
    if n_mask == 0:
        return MaskedExample(tuple(tokens), (), 0, seed, prefix)

    rng = random.Random(seed)

    # draw span lengths until the mask budget is spent
    p = min(1.0, 1.0 / mean_span_len)
    lengths: list[int] = []
    remaining = n_mask
    while remaining > 0:
        length = min(_geometric(rng, p), remaining)
        lengths.append(length)
        remaining -= length

    # k spans occupy k distinct gap slots among the n_keep + 1 slots around
    # kept tokens, which guarantees a kept token between any two sentinels
    n_keep = n - n_mask
    while len(lengths) > n_keep + 1:
        lengths[-2] += lengths[-1]
        lengths.pop()
    rng.shuffle(lengths)
    slots = sorted(rng.sample(range(n_keep + 1), len(lengths)))
    span_at = dict(zip(slots, lengths))

    input_tokens: list[str] = []
    target_tokens: list[str] = []
    pos = 0
    sentinel_idx = 0
    for slot in range(n_keep + 1):
        if slot in span_at:
            name = f"{prefix}{sentinel_idx}>"
            input_tokens.append(name)
            target_tokens.append(name)
            target_tokens.extend(tokens[pos : pos + span_at[slot]])
            pos += span_at[slot]
            sentinel_idx += 1
        if slot < n_keep:
            input_tokens.append(tokens[pos])
            pos += 1
    assert pos == n
    return MaskedExample(tuple(input_tokens), tuple(target_tokens), sentinel_idx, seed, prefix)


def _geometric(rng: random.Random, p: float) -> int:
    # inverse-CDF geometric on {1, 2, ...} with success probability p
    if p >= 1.0:
        return 1
    return 1 + int(math.log(1.0 - rng.random()) / math.log(1.0 - p))


def reconstruct(ex: MaskedExample) -> list[str]:
    """Splice target spans back into the input at their sentinels."""
    input_sentinels = [t for t in ex.input_tokens if ex.is_sentinel(t)]
    spans: dict[str, list[str]] = {}
    current: list[str] | None = None
    for token in ex.target_tokens:
        if ex.is_sentinel(token):
            if token in spans:
                raise ValueError(f"duplicate sentinel {token!r} in target")
            if token not in input_sentinels:
                raise ValueError(f"target sentinel {token!r} absent from input")
            current = spans[token] = []
        elif current is None:
            raise ValueError("target tokens before the first sentinel")
        else:
            current.append(token)
    if set(spans) != set(input_sentinels):
        unmatched = sorted(set(input_sentinels) - set(spans))
        raise ValueError(f"input sentinels missing from target: {unmatched}")

    out: list[str] = []
    for token in ex.input_tokens:
        if token in spans:
            out.extend(spans[token])
        else:
            out.append(token)
    return out


def sub_seed(seed: int, index: int) -> int:
    """Stable per-record seed derivation for corpus-level corruption."""
    digest = hashlib.blake2b(f"{seed}|{index}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def corrupt_corpus(reports: list[str], rate: float, mean_span_len: float = 3.0,
                   seed: int = 0) -> list[MaskedExample]:
    """Corrupt each report (whitespace-lowercase tokenized) with its own
    derived sub-seed; output order matches input order."""
    from .metrics import tokenize_simple

    return [
        corrupt(tokenize_simple(report), rate, mean_span_len, sub_seed(seed, i))
        for i, report in enumerate(reports)
    ]


def write_masked_corpus(examples: list[MaskedExample], path: str, rate: float,
                        ids: list[str] | None = None) -> None:
    """One JSON record per line: {id, input, target, seed, rate}."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, ex in enumerate(examples):
            record = {
                "id": ids[i] if ids else f"masked-{i:06d}",
                "input": " ".join(ex.input_tokens),
                "target": " ".join(ex.target_tokens),
                "seed": ex.seed,
                "rate": rate,
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
