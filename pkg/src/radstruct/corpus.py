"""Corpus ingestion, input assembly, train/test splitting, and the file
contracts shared with the model adapter.

All files are UTF-8 JSON lines:
  corpus:       {id, report, target?, annotator?}
  prepared:     {id, input, target?}
  predictions:  {id, prediction}
  split:        single JSON object {seed, fraction, train, test}
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

from .metrics import cohen_kappa
from .reportql import flatten, parse_report, prune_to_organs, serialize_canonical
from .schema import SchemaSet, linearize_schema, list_slot_paths, normalize_name

DEFAULT_SEPARATOR = "[REPORT]"

ABSENT = "ABSENT"


class CorpusError(ValueError):
    """Malformed corpus, prepared, prediction, or manifest data."""


@dataclass(frozen=True)
class ReportRecord:
    id: str
    report_text: str
    target: str | None = None
    annotator_ids: tuple[str, str] | None = None


@dataclass(frozen=True)
class PreparedExample:
    id: str
    input_text: str
    target_text: str | None = None


@dataclass(frozen=True)
class SplitManifest:
    seed: int
    fraction: float
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


def _read_jsonl(path: str):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise CorpusError(f"{path}:{line_no}: expected a JSON object")
            yield line_no, obj


def load_corpus(path: str) -> list[ReportRecord]:
    """Load and validate a corpus file; targets are canonicalized."""
    records: list[ReportRecord] = []
    seen: set[str] = set()
    for line_no, obj in _read_jsonl(path):
        rid = obj.get("id")
        report = obj.get("report")
        if not isinstance(rid, str) or not rid:
            raise CorpusError(f"{path}:{line_no}: missing or empty 'id'")
        if not isinstance(report, str):
            raise CorpusError(f"{path}:{line_no}: missing 'report' text")
        if rid in seen:
            raise CorpusError(f"{path}:{line_no}: duplicate id '{rid}'")
        seen.add(rid)

        target = obj.get("target")
        if target is not None:
            if not isinstance(target, str):
                raise CorpusError(f"{path}:{line_no}: 'target' must be a string")
            try:
                doc, _ = parse_report(target)
            except ValueError as exc:
                raise CorpusError(f"{path}:{line_no}: unparseable target: {exc}") from exc
            target = serialize_canonical(doc)

        annotator = obj.get("annotator")
        annotator_ids = None
        if annotator is not None:
            if (not isinstance(annotator, (list, tuple)) or len(annotator) != 2
                    or not all(isinstance(a, str) for a in annotator)):
                raise CorpusError(f"{path}:{line_no}: 'annotator' must be a pair of strings")
            annotator_ids = (annotator[0], annotator[1])

        records.append(ReportRecord(rid, report, target, annotator_ids))
    return records


def save_corpus(records: list[ReportRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            obj: dict = {"id": r.id, "report": r.report_text}
            if r.target is not None:
                obj["target"] = r.target
            if r.annotator_ids is not None:
                obj["annotator"] = list(r.annotator_ids)
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def split(records: list[ReportRecord], train_fraction: float = 0.8,
          seed: int = 0) -> SplitManifest:
    """Deterministic seeded shuffle; train size floor(fraction * n), clamped
    so both sides are non-empty."""
    if len(records) < 2:
        raise CorpusError(f"need at least 2 records to split, got {len(records)}")
    if not 0.0 < train_fraction < 1.0:
        raise CorpusError(f"train_fraction must be in (0, 1), got {train_fraction}")
    ids = [r.id for r in records]
    random.Random(seed).shuffle(ids)
    n_train = min(len(ids) - 1, max(1, math.floor(train_fraction * len(ids))))
    return SplitManifest(seed, train_fraction, tuple(ids[:n_train]), tuple(ids[n_train:]))


def save_manifest(manifest: SplitManifest, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "seed": manifest.seed,
                "fraction": manifest.fraction,
                "train": list(manifest.train_ids),
                "test": list(manifest.test_ids),
            },
            fh,
        )
        fh.write("\n")


def load_manifest(path: str) -> SplitManifest:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    return SplitManifest(obj["seed"], obj["fraction"], tuple(obj["train"]), tuple(obj["test"]))


def assemble_input(
    record: ReportRecord,
    schema: SchemaSet,
    organ_filter: list[str] | None = None,
    separator: str = DEFAULT_SEPARATOR,
) -> tuple[PreparedExample, list[str]]:
    """Build the model input: linearized schema, separator, report text.

    With an organ filter, both the schema segment and the target (when
    present) are restricted to the selected organs.
    """
    warnings: list[str] = []
    schema_text = linearize_schema(schema, organ_filter)
    if separator in schema_text or separator in record.report_text:
        raise CorpusError(f"separator {separator!r} occurs in the schema or report text")
    input_text = f"{schema_text} {separator} {record.report_text}"

    target_text = record.target
    if target_text is not None and organ_filter is not None:
        doc, _ = parse_report(target_text)
        pruned, prune_warnings = prune_to_organs(doc, organ_filter)
        warnings.extend(prune_warnings)
        target_text = serialize_canonical(pruned)
    return PreparedExample(record.id, input_text, target_text), warnings


def export_prepared(examples: list[PreparedExample], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            obj: dict = {"id": ex.id, "input": ex.input_text}
            if ex.target_text is not None:
                obj["target"] = ex.target_text
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def import_prepared(path: str) -> list[PreparedExample]:
    examples: list[PreparedExample] = []
    seen: set[str] = set()
    for line_no, obj in _read_jsonl(path):
        rid = obj.get("id")
        text = obj.get("input")
        if not isinstance(rid, str) or not isinstance(text, str):
            raise CorpusError(f"{path}:{line_no}: prepared record needs 'id' and 'input'")
        if rid in seen:
            raise CorpusError(f"{path}:{line_no}: duplicate id '{rid}'")
        seen.add(rid)
        examples.append(PreparedExample(rid, text, obj.get("target")))
    return examples


def import_predictions(path: str, known_ids: set[str] | None = None) -> list[tuple[str, str]]:
    """Read a predictions file; ids must be unique and, when known_ids is
    given, a subset of it."""
    predictions: list[tuple[str, str]] = []
    seen: set[str] = set()
    for line_no, obj in _read_jsonl(path):
        rid = obj.get("id")
        text = obj.get("prediction")
        if not isinstance(rid, str) or not isinstance(text, str):
            raise CorpusError(f"{path}:{line_no}: prediction record needs 'id' and 'prediction'")
        if rid in seen:
            raise CorpusError(f"{path}:{line_no}: duplicate id '{rid}'")
        if known_ids is not None and rid not in known_ids:
            raise CorpusError(f"{path}:{line_no}: unknown id '{rid}'")
        seen.add(rid)
        predictions.append((rid, text))
    return predictions


# ---------------------------------------------------------------------------
# Inter-annotator agreement


def _slot_labels(record: ReportRecord, paths: list[tuple[str, ...]]) -> dict[tuple[str, ...], str]:
    if record.target is None:
        raise CorpusError(f"record '{record.id}' has no annotation target")
    doc, _ = parse_report(record.target)
    pairs, _ = flatten(doc)
    by_path: dict[tuple[str, ...], list[str]] = {}
    for pair in pairs:
        key = tuple(normalize_name(seg) for seg in pair.path)
        by_path.setdefault(key, []).append(normalize_name(pair.value))
    labels: dict[tuple[str, ...], str] = {}
    for path in paths:
        values = by_path.get(tuple(normalize_name(seg) for seg in path))
        # repeated findings at one path collapse to one multiset-label
        labels[path] = " || ".join(sorted(values)) if values else ABSENT
    return labels


@dataclass(frozen=True)
class SlotAgreement:
    path: tuple[str, ...]
    n_items: int
    observed_agreement: float


def agreement(
    records_a: list[ReportRecord],
    records_b: list[ReportRecord],
    schema: SchemaSet,
) -> tuple[float, list[SlotAgreement]]:
    """Cohen's kappa over (report, slot path) decisions from two annotators.

    For every schema leaf path and report, an annotator's label is the
    flattened value at that path (or ABSENT). Returns the pooled kappa and
    a per-slot observed-agreement table.
    """
    ids_a = {r.id for r in records_a}
    ids_b = {r.id for r in records_b}
    if ids_a != ids_b:
        raise CorpusError(
            f"annotator corpora cover different ids: {sorted(ids_a ^ ids_b)[:5]}..."
        )
    by_id_b = {r.id: r for r in records_b}
    paths = list_slot_paths(schema)

    labels_a: list[str] = []
    labels_b: list[str] = []
    per_slot_hits: dict[tuple[str, ...], list[bool]] = {p: [] for p in paths}
    for rec_a in records_a:
        rec_b = by_id_b[rec_a.id]
        la = _slot_labels(rec_a, paths)
        lb = _slot_labels(rec_b, paths)
        for path in paths:
            labels_a.append(la[path])
            labels_b.append(lb[path])
            per_slot_hits[path].append(la[path] == lb[path])

    table = [
        SlotAgreement(path, len(hits), sum(hits) / len(hits) if hits else 0.0)
        for path, hits in per_slot_hits.items()
    ]
    return cohen_kappa(labels_a, labels_b), table
