"""JSONL pair files: masked corpora, prepared pairs, predictions."""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Pair:
    id: str
    input: str
    target: str | None = None


def _rows(path: str):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{line_no}: bad JSON: {exc}") from exc
            yield line_no, row


def load_pairs(path: str, require_target: bool = False) -> list[Pair]:
    """Accepts prepared ({id, input, target?}) and masked
    ({id, input, target, ...}) files alike; extra keys are ignored.
    """
    pairs = []
    for line_no, row in _rows(path):
        if "id" not in row or "input" not in row:
            raise ValueError(f"{path}:{line_no}: need 'id' and 'input' keys")
        target = row.get("target")
        if require_target and target is None:
            raise ValueError(f"{path}:{line_no}: missing 'target'")
        pairs.append(Pair(str(row["id"]), str(row["input"]),
                          None if target is None else str(target)))
    if not pairs:
        raise ValueError(f"{path}: no records")
    return pairs


def write_predictions(path: str, rows: list[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rid, pred in rows:
            fh.write(json.dumps({"id": rid, "prediction": pred}) + "\n")
