"""Shipped example data: the default abdominopelvic schema, the canonical
worked example (free-text report and its structured equivalent), and a
clearly synthetic templated fixture corpus for end-to-end runs.

The synthetic corpus is generated, not collected: sentences are filled
from the schema's value lists by a seeded RNG. It exists so the pipeline
and the toy adapter can be exercised without any clinical data.
"""

from __future__ import annotations

import random
from importlib import resources

from .corpus import ReportRecord
from .corruption import sub_seed
from .reportql import Entry, ReportDoc, serialize_canonical
from .schema import CATEGORICAL, SchemaSet, normalize_name, parse_schema

EXAMPLE_FREE_TEXT = (
    "The liver is normal in size and with normal parenchymal echogenicity with no sign "
    "of space-occupying lesion or bile ducts dilatation. GB is well distended with no "
    "stone or wall thickening. The spleen is normal in size and parenchymal echogenicity "
    "with no sign of space-occupying lesion. visualized parts of the pancreas and "
    "para-aortic area are unremarkable. Both kidneys are normal in size with normal "
    "cortical parenchymal echogenicity with no sign of the stone, stasis, or perinephric "
    "collection. ureters are not dilated. The urinary bladder is empty so evaluation of "
    "pelvic organs is not possible. no free fluid is seen in the abdominopelvic cavity."
)

EXAMPLE_STRUCTURED = (
    "liver { size { normal } echogenicity { normal } lesion { no } bile duct { no } } "
    "GB { seen { yes } distention { well } stone { no } wall thickening { no } } "
    "spleen { size { normal } echogenicity { normal } lesion { no } } "
    "pancreas { seen { yes } } "
    "right kidney { size { normal } cortical parenchymal { normal } stone { no } "
    "stasis severity { no } perinephric collection { no } } "
    "left kidney { size { normal } cortical parenchymal { normal } stone { no } "
    "stasis severity { no } perinephric collection { no } } "
    "right ureter { dilation { no } } "
    "left ureter { dilation { no } } "
    "bladder { distension empty evaluation { yes } } "
    "abdominopelvic cavity { free fluid { no } }"
)


def default_schema_text() -> str:
    return resources.files("radstruct.data").joinpath("abdominopelvic.schema").read_text("utf-8")


def default_schema() -> SchemaSet:
    return parse_schema(default_schema_text(), version="abdominopelvic-v1")


# Canned phrases for free-text slots in the synthetic generator.
_FREE_TEXT_CHOICES = ("few", "multiple", "up to 7 mm", "up to 12 mm", "upper pole", "lower pole")

_DEFAULT_FIXTURE_ORGANS = ("liver", "gb", "spleen")


def _sample_organ_entries(organ, rng: random.Random) -> tuple[Entry, list[str]]:
    """Pick a value for each slot of one organ; return (subtree, clauses)."""
    children: list[Entry] = []
    clauses: list[str] = []

    def fill(slot, prefix: str) -> Entry:
        if slot.kind == CATEGORICAL:
            value = rng.choice(slot.allowed_values)
        elif slot.is_leaf():
            value = rng.choice(_FREE_TEXT_CHOICES)
        else:
            subs = tuple(fill(child, f"{prefix}{slot.name} ") for child in slot.children)
            return Entry(tuple(slot.name.split()), subs)
        clauses.append(f"{prefix}{slot.name} is {value}")
        return Entry(tuple(slot.name.split()), (Entry(tuple(value.split())),))

    for slot in organ.slots:
        children.append(fill(slot, ""))
    return Entry(tuple(organ.name.split()), tuple(children)), clauses


def make_synthetic_corpus(
    n: int = 40,
    seed: int = 7,
    organs: tuple[str, ...] = _DEFAULT_FIXTURE_ORGANS,
    schema: SchemaSet | None = None,
) -> list[ReportRecord]:
    """Generate `n` templated (report, target) records from the schema."""
    schema = schema or default_schema()
    wanted = [normalize_name(o) for o in organs]
    selected = [o for o in schema.organs if normalize_name(o.name) in wanted]
    if len(selected) != len(wanted):
        missing = set(wanted) - {normalize_name(o.name) for o in selected}
        raise ValueError(f"fixture organs not in schema: {sorted(missing)}")

    records: list[ReportRecord] = []
    for i in range(n):
        rng = random.Random(sub_seed(seed, i))
        entries: list[Entry] = []
        sentences: list[str] = []
        for organ in selected:
            entry, clauses = _sample_organ_entries(organ, rng)
            entries.append(entry)
            sentences.append(f"Sonography of the {organ.name} shows {', '.join(clauses)}.")
        records.append(
            ReportRecord(
                id=f"synthetic-{i:04d}",
                report_text=" ".join(sentences),
                target=serialize_canonical(ReportDoc(tuple(entries))),
            )
        )
    return records
