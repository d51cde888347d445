"""ReportQL: the bracketed structured-report language.

Grammar:

    document := entry*
    entry    := phrase block?
    block    := '{' entry* '}'
    phrase   := word+

Tokens are maximal runs of non-whitespace characters, except that `{` and
`}` are always standalone tokens, whitespace-delimited or not. A phrase is
greedy: consecutive words belong to one phrase, so a blockless entry can
only occur as the last sibling of its block (the parser never produces
adjacent sibling leaves).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .schema import CATEGORICAL, SchemaSet, find_slot, normalize_name


class ReportQLError(ValueError):
    """Malformed ReportQL text."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, col {column}: {message}")


@dataclass(frozen=True)
class Entry:
    words: tuple[str, ...]
    block: tuple["Entry", ...] | None = None

    def __post_init__(self):
        if not self.words:
            raise ValueError("entry phrase must be non-empty")
        for w in self.words:
            if not w or "{" in w or "}" in w or any(c.isspace() for c in w):
                raise ValueError(f"invalid phrase word: {w!r}")

    @property
    def phrase(self) -> str:
        return " ".join(self.words)

    def is_leaf(self) -> bool:
        return self.block is None


@dataclass(frozen=True)
class ReportDoc:
    entries: tuple[Entry, ...] = ()


@dataclass(frozen=True)
class SlotPair:
    path: tuple[str, ...]
    value: str


@dataclass(frozen=True)
class Violation:
    kind: str  # unknown_organ | unknown_slot | bad_value
    path: tuple[str, ...]
    value: str | None
    message: str


PRESENCE_MARKER = "present"


# ---------------------------------------------------------------------------
# Lexing / parsing


def _lex(source: str):
    """Yield (token, line, col); braces are standalone tokens."""
    for line_no, line in enumerate(source.splitlines(), start=1):
        col = 0
        n = len(line)
        while col < n:
            ch = line[col]
            if ch.isspace():
                col += 1
                continue
            if ch in "{}":
                yield ch, line_no, col + 1
                col += 1
                continue
            start = col
            while col < n and not line[col].isspace() and line[col] not in "{}":
                col += 1
            yield line[start:col], line_no, start + 1


@dataclass
class _Frame:
    owner_words: tuple[str, ...] | None  # None for the document frame
    entries: list[Entry] = field(default_factory=list)
    open_line: int = 0
    open_col: int = 0


def parse_report(source: str) -> tuple[ReportDoc, list[str]]:
    """Parse ReportQL text into a tree, returning (doc, warnings).

    Raises ReportQLError on unbalanced braces or a block with no preceding
    phrase. Empty input parses to an empty document. Warnings flag
    top-level phrase-only entries and empty blocks.
    """
    warnings: list[str] = []
    frames: list[_Frame] = [_Frame(None)]
    pending: list[str] = []

    for token, line, col in _lex(source):
        if token == "{":
            if not pending:
                raise ReportQLError("block with no preceding phrase", line, col)
            frames.append(_Frame(tuple(pending), [], line, col))
            pending = []
        elif token == "}":
            if pending:
                frames[-1].entries.append(Entry(tuple(pending)))
                pending = []
            if len(frames) == 1:
                raise ReportQLError("unbalanced '}' with no open block", line, col)
            frame = frames.pop()
            if not frame.entries:
                warnings.append(
                    f"empty block after '{' '.join(frame.owner_words or ())}' "
                    f"at line {frame.open_line}, col {frame.open_col}"
                )
            frames[-1].entries.append(Entry(frame.owner_words or (), tuple(frame.entries)))
        else:
            pending.append(token)

    if pending:
        frames[-1].entries.append(Entry(tuple(pending)))
    if len(frames) > 1:
        frame = frames[-1]
        raise ReportQLError("unclosed '{'", frame.open_line, frame.open_col)

    for entry in frames[0].entries:
        if entry.is_leaf():
            warnings.append(f"top-level phrase-only entry: {entry.phrase!r}")
    return ReportDoc(tuple(frames[0].entries)), warnings


# ---------------------------------------------------------------------------
# Canonical serialization


def serialize_canonical(d: ReportDoc) -> str:
    """Single-line canonical form; fixed point of parse -> serialize."""
    return " ".join(_serialize_entry(e) for e in d.entries)


def _serialize_entry(e: Entry) -> str:
    if e.block is None:
        return e.phrase
    if not e.block:
        return f"{e.phrase} {{ }}"
    inner = " ".join(_serialize_entry(c) for c in e.block)
    return f"{e.phrase} {{ {inner} }}"


# ---------------------------------------------------------------------------
# Flattening and comparison


def flatten(d: ReportDoc) -> tuple[list[SlotPair], list[str]]:
    """Flatten a tree into (key-path, value) pairs, document order.

    Leaf entries yield a pair whose value is the leaf phrase and whose path
    is the chain of ancestor phrases. A top-level leaf has no ancestors; it
    yields path = [its own phrase] with the presence marker as value, plus
    a warning. Duplicates are preserved (multiset semantics downstream).
    """
    pairs: list[SlotPair] = []
    warnings: list[str] = []
    for entry in d.entries:
        if entry.is_leaf():
            warnings.append(f"top-level leaf {entry.phrase!r} flattened as presence marker")
            pairs.append(SlotPair((entry.phrase,), PRESENCE_MARKER))
        else:
            _flatten_into(entry, (), pairs)
    return pairs, warnings


def _flatten_into(entry: Entry, prefix: tuple[str, ...], out: list[SlotPair]) -> None:
    if entry.is_leaf():
        out.append(SlotPair(prefix, entry.phrase))
    else:
        path = prefix + (entry.phrase,)
        for child in entry.block or ():
            _flatten_into(child, path, out)


def _normalize_pair(p: SlotPair) -> tuple[tuple[str, ...], str]:
    return tuple(normalize_name(seg) for seg in p.path), normalize_name(p.value)


def diff_reports(
    pred: ReportDoc, gold: ReportDoc
) -> tuple[list[SlotPair], list[SlotPair], list[SlotPair]]:
    """Multiset diff of flattened pairs: (matched, missing, spurious).

    Matching is on (path, value) after lowercasing and whitespace
    normalization; repeated identical pairs match with multiplicity.
    """
    pred_pairs, _ = flatten(pred)
    gold_pairs, _ = flatten(gold)
    pred_counts = Counter(_normalize_pair(p) for p in pred_pairs)
    gold_counts = Counter(_normalize_pair(p) for p in gold_pairs)

    matched: list[SlotPair] = []
    missing: list[SlotPair] = []
    spurious: list[SlotPair] = []
    for key in sorted(set(pred_counts) | set(gold_counts)):
        path, value = key
        n_pred, n_gold = pred_counts[key], gold_counts[key]
        matched.extend(SlotPair(path, value) for _ in range(min(n_pred, n_gold)))
        missing.extend(SlotPair(path, value) for _ in range(n_gold - min(n_pred, n_gold)))
        spurious.extend(SlotPair(path, value) for _ in range(n_pred - min(n_pred, n_gold)))
    return matched, missing, spurious


# ---------------------------------------------------------------------------
# Schema validation


def validate_against_schema(d: ReportDoc, s: SchemaSet) -> list[Violation]:
    """Check a report against a schema; violations are data, not errors."""
    violations: list[Violation] = []
    pairs, _ = flatten(d)
    for pair in pairs:
        path, value = _normalize_pair(pair)
        if s.organ(path[0]) is None:
            violations.append(
                Violation("unknown_organ", path, value, f"unknown organ '{path[0]}'")
            )
            continue
        if len(path) == 1:
            violations.append(
                Violation(
                    "unknown_slot", path, value,
                    f"organ '{path[0]}' used without a slot",
                )
            )
            continue
        slot = find_slot(s, path)
        if slot is None or not slot.is_leaf():
            violations.append(
                Violation(
                    "unknown_slot", path, value,
                    f"unknown slot path '{'/'.join(path)}'",
                )
            )
            continue
        if slot.kind == CATEGORICAL and value not in {
            normalize_name(v) for v in slot.allowed_values
        }:
            violations.append(
                Violation(
                    "bad_value", path, value,
                    f"value '{value}' not allowed for '{'/'.join(path)}' "
                    f"(allowed: {', '.join(slot.allowed_values)})",
                )
            )
    return violations


def count_leaves(d: ReportDoc) -> int:
    """Number of blockless entries in the tree (flatten's leaf count)."""

    def walk(e: Entry) -> int:
        if e.is_leaf():
            return 1
        return sum(walk(c) for c in e.block or ())

    return sum(walk(e) for e in d.entries)


def prune_to_organs(d: ReportDoc, organs: list[str]) -> tuple[ReportDoc, list[str]]:
    """Keep only top-level entries whose phrase matches a selected organ."""
    wanted = {normalize_name(o) for o in organs}
    kept = tuple(e for e in d.entries if normalize_name(e.phrase) in wanted)
    warnings = [] if kept else ["organ filter matched no entries; target is empty"]
    return ReportDoc(kept), warnings
