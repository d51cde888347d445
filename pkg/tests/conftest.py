import random

import pytest

from radstruct.fixtures import EXAMPLE_STRUCTURED, default_schema
from radstruct.reportql import Entry, ReportDoc

GB_SCHEMA_TEXT = """\
organ GB
slot seen = yes | no
slot distention = well | poor | no
slot stone = yes | no
slot wall thickening = yes | no
"""


@pytest.fixture
def gb_schema_text():
    return GB_SCHEMA_TEXT


@pytest.fixture
def abdo_schema():
    return default_schema()


@pytest.fixture
def table1_text():
    return EXAMPLE_STRUCTURED


# -- random canonical ReportQL trees -----------------------------------------
# The grammar is greedy on phrases, so a blockless entry only survives a
# round trip as the last sibling; the generator respects that.


def rand_words(rng: random.Random) -> tuple[str, ...]:
    return tuple(
        "".join(rng.choice("abcdefghij") for _ in range(rng.randint(1, 3)))
        for _ in range(rng.randint(1, 3))
    )


def rand_entry(rng: random.Random, depth: int, allow_leaf: bool) -> Entry:
    if allow_leaf and (depth >= 5 or rng.random() < 0.4):
        return Entry(rand_words(rng))
    n = rng.randint(0, 6) if depth < 5 else 0
    children = tuple(
        rand_entry(rng, depth + 1, allow_leaf=(i == n - 1)) for i in range(n)
    )
    return Entry(rand_words(rng), children)


def rand_doc(rng: random.Random) -> ReportDoc:
    n = rng.randint(0, 6)
    entries = tuple(rand_entry(rng, 1, allow_leaf=(i == n - 1)) for i in range(n))
    return ReportDoc(entries)
