"""
Triple patterns and their textual form.

The textual form is a sequence of ``subject property value`` triples
separated by ``.``, for example::

    ?f <uses> <imaginary-unit> . ?f P4 ?concept

Terms are variables (``?name``), local ids (``Q7``, ``P4``), English labels
or aliases in angle brackets, or double-quoted literals (value position only).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Union

from pydantic import BaseModel, ConfigDict, Field
from pyparsing import (
    Group,
    Optional,
    ParseBaseException,
    ParserElement,
    QuotedString,
    Regex,
    Suppress,
    ZeroOrMore,
)

from mathkg.core.exceptions import QueryError
from mathkg.kg.models import EntityId, EntityKind, StatementValue
from mathkg.kg.store import KnowledgeGraphStore


class Var(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str = Field(pattern=r"^[A-Za-z_][A-Za-z0-9_]*$")

    def __str__(self) -> str:
        return f"?{self.name}"


class TextLiteral(BaseModel):
    """Matches any non-item value whose lexical form equals ``text``."""

    model_config = ConfigDict(frozen=True)

    text: str


PatternValue = Union[Var, EntityId, TextLiteral, StatementValue]


class TriplePattern(BaseModel):
    model_config = ConfigDict(frozen=True)

    subject: Union[Var, EntityId]
    property: Union[Var, EntityId]
    value: PatternValue

    def variables(self) -> list[Var]:
        return [t for t in (self.subject, self.property, self.value) if isinstance(t, Var)]


def resolve_reference(
    store: KnowledgeGraphStore, ref: str, kind: EntityKind | None = None
) -> EntityId:
    """
    A local id (``Q7``) or an English label or alias, with or without angle brackets.

    Raises:
        QueryError: If nothing or more than one entity matches.
    """
    text = ref.strip()
    if text.startswith("<") and text.endswith(">"):
        text = text[1:-1].strip()
    if EntityId.is_entity_id(text):
        entity_id = EntityId.parse(text)
        if entity_id not in store:
            raise QueryError(f"Unknown entity {entity_id}")
        return entity_id
    found = store.find_by_label(text, kind=kind)
    if not found:
        raise QueryError(f"No {kind or 'entity'} labelled {text!r}")
    if len(found) > 1:
        raise QueryError(f"{text!r} is ambiguous: {', '.join(str(f) for f in found)}")
    return found[0]


# ==========================================
# Grammar
# ==========================================


@dataclass(frozen=True)
class _Term:
    kind: str
    text: str


@lru_cache(maxsize=1)
def _pattern_grammar() -> ParserElement:
    var = Regex(r"\?[A-Za-z_][A-Za-z0-9_]*").set_parse_action(lambda t: _Term("var", t[0][1:]))
    label = QuotedString("<", end_quote_char=">").set_parse_action(lambda t: _Term("label", t[0]))
    entity_id = Regex(r"[QP][1-9][0-9]*\b").set_parse_action(lambda t: _Term("id", t[0]))
    literal = QuotedString('"', esc_char="\\").set_parse_action(lambda t: _Term("literal", t[0]))
    term = var | label | entity_id | literal
    pattern = Group(term + term + term)
    return pattern + ZeroOrMore(Suppress(".") + pattern) + Optional(Suppress("."))


def _term(store: KnowledgeGraphStore, term: _Term, position: str):
    kind, text = term.kind, term.text
    if kind == "var":
        return Var(name=text)
    if kind == "literal":
        if position != "value":
            raise QueryError(f"A literal cannot be the {position} of a pattern")
        return TextLiteral(text=text)
    return resolve_reference(store, text, "property" if position == "property" else "item")


def parse_patterns(text: str, store: KnowledgeGraphStore) -> list[TriplePattern]:
    """
    Parses the textual form, resolving ids and labels against ``store``.

    Raises:
        QueryError: On a syntax error or an unresolved reference.
    """
    if not text.strip():
        raise QueryError("Empty query")
    try:
        parsed = _pattern_grammar().parse_string(text, parse_all=True)
    except ParseBaseException as e:
        raise QueryError(f"Query syntax error at column {e.column}: {e.msg}") from e
    return [
        TriplePattern(
            subject=_term(store, group[0], "subject"),
            property=_term(store, group[1], "property"),
            value=_term(store, group[2], "value"),
        )
        for group in parsed
    ]
