"""
Bundled mhchem conformance corpus.

Each line pairs an equation with the canonical MathML fragment its parse
tree must render to. The fragment is decoded back into a MathNode so the
corpus pins both the tree and the markup.
"""

import logging
from functools import lru_cache
from pathlib import Path

import pandera.pandas as pa
from lxml import etree
from pydantic import BaseModel, ConfigDict

from mathkg.chem.parser import upright
from mathkg.core.exceptions import RegistryError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.core.tables import read_tsv_table
from mathkg.formula.nodes import ChemEquation, MathNode, Number, Operator, Row, Script

logger = logging.getLogger(__name__)

SUITE_COLUMNS = ["input", "mathml"]

SUITE_SCHEMA = pa.DataFrameSchema(
    {
        "input": pa.Column(str, pa.Check.str_length(min_value=1), unique=True),
        "mathml": pa.Column(str, pa.Check.str_startswith("<mrow>")),
    },
    strict=True,
)


class CeCase(BaseModel):
    model_config = ConfigDict(frozen=True)

    input: str
    mathml: str
    expected: ChemEquation


def _decode(element: etree._Element, top: bool = False) -> MathNode:
    tag = element.tag
    children = [_decode(child) for child in element]
    if tag == "mtext":
        return upright(element.text or "")
    if tag == "mn":
        return Number(literal=element.text or "")
    if tag == "mo":
        return Operator(symbol=element.text or "")
    if tag == "mrow":
        return ChemEquation(children=tuple(children)) if top else Row(children=tuple(children))
    if tag == "msub":
        return Script(base=children[0], sub=children[1])
    if tag == "msup":
        return Script(base=children[0], sup=children[1])
    if tag == "msubsup":
        return Script(base=children[0], sub=children[1], sup=children[2])
    raise RegistryError(f"Unexpected element <{tag}> in conformance corpus")


def decode_fragment(fragment: str) -> ChemEquation:
    """Reads a canonical chemical MathML fragment back into a ChemEquation."""
    try:
        root = etree.fromstring(fragment.encode("utf-8"))
    except etree.XMLSyntaxError as e:
        raise RegistryError(f"Malformed MathML fragment {fragment!r}: {e}") from e
    node = _decode(root, top=True)
    assert isinstance(node, ChemEquation)
    return node


def load_ce_suite(path: str | Path = PP.CE_SUITE) -> list[CeCase]:
    df = read_tsv_table(path, SUITE_COLUMNS, SUITE_SCHEMA)
    cases = [
        CeCase(input=row["input"], mathml=row["mathml"], expected=decode_fragment(row["mathml"]))
        for _, row in df.iterrows()
    ]
    logger.info(f"Loaded {len(cases)} mhchem conformance cases")
    return cases


@lru_cache(maxsize=1)
def _bundled_suite() -> tuple[CeCase, ...]:
    return tuple(load_ce_suite())


def ce_test_suite() -> list[CeCase]:
    return list(_bundled_suite())
