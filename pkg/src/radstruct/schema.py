"""Hierarchical information schemas: what may be reported, per organ.

A schema is an ordered set of organs, each carrying a tree of slots. Slots
are categorical (closed value list), free-text, or composite (sub-slots).
Schemas are immutable after parsing and act as both the annotation contract
and the context string prepended to model inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

MAX_DEPTH = 6

CATEGORICAL = "categorical"
FREE_TEXT = "free-text"
COMPOSITE = "composite"

_WS_RE = re.compile(r"\s+")


def normalize_name(name: str) -> str:
    """Matching key: lowercase, internal whitespace collapsed."""
    return _WS_RE.sub(" ", name.strip().lower())


def collapse_ws(name: str) -> str:
    """Display form: whitespace collapsed, case preserved."""
    return _WS_RE.sub(" ", name.strip())


class SchemaError(ValueError):
    """Schema text that violates the format or a structural invariant."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}: {message}" if column is None else f"line {line}, col {column}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class SlotNode:
    name: str
    kind: str
    allowed_values: tuple[str, ...] = ()
    children: tuple["SlotNode", ...] = ()

    def __post_init__(self):
        if self.kind == CATEGORICAL:
            if not self.allowed_values or self.children:
                raise SchemaError(f"categorical slot '{self.name}' requires values and no children")
        elif self.kind == COMPOSITE:
            if not self.children or self.allowed_values:
                raise SchemaError(f"composite slot '{self.name}' requires children and no values")
        elif self.kind == FREE_TEXT:
            if self.allowed_values or self.children:
                raise SchemaError(f"free-text slot '{self.name}' takes no values or children")
        else:
            raise SchemaError(f"unknown slot kind '{self.kind}'")

    def is_leaf(self) -> bool:
        return self.kind != COMPOSITE


@dataclass(frozen=True)
class OrganSchema:
    name: str
    slots: tuple[SlotNode, ...]

    def __post_init__(self):
        _check_sibling_names(self.slots, f"organ '{self.name}'")
        for slot in self.slots:
            _check_depth(slot, 2)


@dataclass(frozen=True)
class SchemaSet:
    organs: tuple[OrganSchema, ...]
    version: str = "unversioned"

    def __post_init__(self):
        if not self.organs:
            raise SchemaError("non-empty: at least one organ")
        seen: set[str] = set()
        for organ in self.organs:
            key = normalize_name(organ.name)
            if key in seen:
                raise SchemaError(f"duplicate organ name '{key}'")
            seen.add(key)

    def organ(self, name: str) -> OrganSchema | None:
        key = normalize_name(name)
        for organ in self.organs:
            if normalize_name(organ.name) == key:
                return organ
        return None


def _check_sibling_names(slots: tuple[SlotNode, ...], where: str) -> None:
    seen: set[str] = set()
    for slot in slots:
        key = normalize_name(slot.name)
        if key in seen:
            raise SchemaError(f"duplicate slot name '{key}' under {where}")
        seen.add(key)
        if slot.kind == COMPOSITE:
            _check_sibling_names(slot.children, f"slot '{slot.name}'")


def _check_depth(slot: SlotNode, depth: int) -> None:
    if depth > MAX_DEPTH:
        raise SchemaError(f"slot '{slot.name}' exceeds maximum nesting depth {MAX_DEPTH}")
    for child in slot.children:
        _check_depth(child, depth + 1)


# ---------------------------------------------------------------------------
# Text format
#
#   organ <name>
#   slot <name> = v1 | v2 | v3     categorical
#   slot <name> = *                free-text
#   slot <name> :                  composite; children on indented lines:
#     sub <name> = ...             (two spaces per nesting level)
#   # comment

_LINE_RE = re.compile(r"^( *)(organ|slot|sub)\s+(.*)$")


def parse_schema(source: str, version: str = "unversioned") -> SchemaSet:
    """Parse the schema text format into a validated SchemaSet."""
    organs: list[OrganSchema] = []
    cur_organ: str | None = None
    # frames[0] collects the current organ's top-level slots; frames[i] (i>0)
    # collects children of the open composite named open_names[i-1]
    frames: list[list[SlotNode]] = []
    open_names: list[str] = []

    def close_frames(down_to: int, line_no: int) -> None:
        while len(frames) > down_to:
            children = frames.pop()
            name = open_names.pop()
            if not children:
                raise SchemaError(f"composite slot '{name}' has no sub-slots", line_no)
            frames[-1].append(SlotNode(name, COMPOSITE, (), tuple(children)))

    def close_organ(line_no: int) -> None:
        nonlocal cur_organ
        if cur_organ is None:
            return
        close_frames(1, line_no)
        try:
            organs.append(OrganSchema(cur_organ, tuple(frames.pop())))
        except SchemaError as exc:
            raise SchemaError(str(exc), line_no) from exc
        cur_organ = None

    n_lines = 0
    for line_no, raw in enumerate(source.splitlines(), start=1):
        n_lines = line_no
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise SchemaError(f"unrecognized line: {line.strip()!r}", line_no, 1)
        indent_str, keyword, rest = m.groups()
        if len(indent_str) % 2 != 0:
            raise SchemaError("indentation must be a multiple of two spaces", line_no, 1)
        level = len(indent_str) // 2

        if keyword == "organ":
            if level != 0:
                raise SchemaError("organ declarations must not be indented", line_no, 1)
            close_organ(line_no)
            name = collapse_ws(rest)
            if not name:
                raise SchemaError("organ needs a name", line_no)
            cur_organ = name
            frames.append([])
            continue

        if cur_organ is None:
            raise SchemaError(f"'{keyword}' before any organ declaration", line_no, 1)
        if keyword == "slot" and level != 0:
            raise SchemaError("'slot' lines must not be indented (use 'sub' for children)", line_no, 1)
        if keyword == "sub" and level == 0:
            raise SchemaError("'sub' lines must be indented under a composite slot", line_no, 1)
        if level >= len(frames):
            raise SchemaError("indentation deeper than the open composite slot", line_no, 1)
        close_frames(level + 1, line_no)

        name, node = _parse_slot_line(rest, line_no)
        if node is None:  # composite header: opens a new frame
            if len(frames) + 1 > MAX_DEPTH:
                raise SchemaError(f"nesting exceeds maximum depth {MAX_DEPTH}", line_no)
            open_names.append(name)
            frames.append([])
        else:
            frames[-1].append(node)

    close_organ(n_lines)
    return SchemaSet(tuple(organs), version=version)


def _parse_slot_line(rest: str, line_no: int) -> tuple[str, SlotNode | None]:
    if rest.rstrip().endswith(":") and "=" not in rest:
        name = collapse_ws(rest.rstrip()[:-1])
        if not name:
            raise SchemaError("composite slot needs a name", line_no)
        return name, None
    if "=" not in rest:
        raise SchemaError(f"expected '=' or ':' in slot declaration: {rest!r}", line_no)
    name_part, value_part = rest.split("=", 1)
    name = collapse_ws(name_part)
    if not name:
        raise SchemaError("slot needs a name", line_no)
    value_part = value_part.strip()
    if value_part == "*":
        return name, SlotNode(name, FREE_TEXT)
    values = tuple(collapse_ws(v) for v in value_part.split("|"))
    if any(not v for v in values):
        raise SchemaError(f"empty value in list for slot '{name}'", line_no)
    return name, SlotNode(name, CATEGORICAL, values)


def serialize_schema(s: SchemaSet) -> str:
    """Inverse writer: emit text that parse_schema maps back to `s`."""
    lines: list[str] = []
    for organ in s.organs:
        lines.append(f"organ {organ.name}")
        for slot in organ.slots:
            _write_slot(slot, 0, lines)
    return "\n".join(lines) + "\n"


def _write_slot(slot: SlotNode, level: int, lines: list[str]) -> None:
    indent = "  " * level
    keyword = "slot" if level == 0 else "sub"
    if slot.kind == CATEGORICAL:
        lines.append(f"{indent}{keyword} {slot.name} = {' | '.join(slot.allowed_values)}")
    elif slot.kind == FREE_TEXT:
        lines.append(f"{indent}{keyword} {slot.name} = *")
    else:
        lines.append(f"{indent}{keyword} {slot.name} :")
        for child in slot.children:
            _write_slot(child, level + 1, lines)


# ---------------------------------------------------------------------------
# Linearization (model context string) and path enumeration


def linearize_schema(s: SchemaSet, organs: list[str] | None = None) -> str:
    """Render the schema as a single brace-free line for model input.

    Each organ renders as `name : slot ( v | v ) , slot , ...`; composite
    slots list their children in parentheses recursively. Organ segments
    are joined with ` ; `.
    """
    selected = _select_organs(s, organs)
    segments = []
    for organ in selected:
        slots = " , ".join(_linearize_slot(slot) for slot in organ.slots)
        segments.append(f"{organ.name} : {slots}" if slots else organ.name)
    return " ; ".join(segments)


def _select_organs(s: SchemaSet, organs: list[str] | None) -> tuple[OrganSchema, ...]:
    if organs is None:
        return s.organs
    wanted = {normalize_name(o) for o in organs}
    known = {normalize_name(o.name) for o in s.organs}
    unknown = sorted(wanted - known)
    if unknown:
        raise SchemaError(f"unknown organ name(s) in filter: {', '.join(unknown)}")
    return tuple(o for o in s.organs if normalize_name(o.name) in wanted)


def _linearize_slot(slot: SlotNode) -> str:
    if slot.kind == CATEGORICAL:
        return f"{slot.name} ( {' | '.join(slot.allowed_values)} )"
    if slot.kind == FREE_TEXT:
        return slot.name
    inner = " , ".join(_linearize_slot(child) for child in slot.children)
    return f"{slot.name} ( {inner} )"


def list_slot_paths(s: SchemaSet) -> list[tuple[str, ...]]:
    """Depth-first enumeration of organ/.../leaf-slot paths."""
    paths: list[tuple[str, ...]] = []
    for organ in s.organs:
        for slot in organ.slots:
            _collect_paths(slot, (organ.name,), paths)
    return paths


def _collect_paths(slot: SlotNode, prefix: tuple[str, ...], out: list[tuple[str, ...]]) -> None:
    path = prefix + (slot.name,)
    if slot.is_leaf():
        out.append(path)
    else:
        for child in slot.children:
            _collect_paths(child, path, out)


def find_slot(s: SchemaSet, path: tuple[str, ...]) -> SlotNode | None:
    """Resolve a normalized organ/slot/... path to its SlotNode, if any."""
    if len(path) < 2:
        return None
    organ = s.organ(path[0])
    if organ is None:
        return None
    nodes = organ.slots
    node: SlotNode | None = None
    for segment in path[1:]:
        key = normalize_name(segment)
        node = next((n for n in nodes if normalize_name(n.name) == key), None)
        if node is None:
            return None
        nodes = node.children
    return node
