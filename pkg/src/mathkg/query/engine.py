"""
Join and reachability over a store snapshot.

select() evaluates patterns left to right as nested-loop joins: each pattern
extends every partial binding produced by the ones before it. A fixed value
item uses the store's inverse index instead of scanning every entity.
"""

import json
import logging
from collections import deque
from typing import Iterator, Literal, Union

from pydantic import BaseModel, ConfigDict

from mathkg.core.exceptions import QueryError
from mathkg.kg.models import EntityId, ItemRef, StatementValue, lexical_value
from mathkg.kg.store import KnowledgeGraphStore
from mathkg.query.patterns import TextLiteral, TriplePattern, Var

logger = logging.getLogger(__name__)

Bound = Union[EntityId, StatementValue]
Row = dict[str, Bound]
Direction = Literal["forward", "inverse"]


def render(value: Bound) -> str:
    return str(value) if isinstance(value, EntityId) else lexical_value(value)


def _sort_key(value: Bound) -> tuple:
    if isinstance(value, EntityId):
        return (0, value.sort_key(), "", "")
    return (1, (0, 0), lexical_value(value), value.type)


class BindingSet(BaseModel):
    """Deduplicated rows in a fixed order: by each variable's value, left to right."""

    model_config = ConfigDict(frozen=True)

    variables: tuple[str, ...]
    rows: tuple[dict[str, Bound], ...]

    @classmethod
    def build(cls, variables: list[str], rows: list[Row]) -> "BindingSet":
        unique: dict[tuple[Bound, ...], Row] = {}
        for row in rows:
            projected = {name: row[name] for name in variables}
            unique.setdefault(tuple(projected.values()), projected)
        ordered = sorted(unique.values(), key=lambda r: tuple(_sort_key(r[n]) for n in variables))
        return cls(variables=tuple(variables), rows=tuple(ordered))

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[Bound]:
        return [row[name] for row in self.rows]

    def to_tsv(self) -> str:
        lines = ["\t".join(f"?{name}" for name in self.variables)]
        lines.extend("\t".join(render(row[name]) for name in self.variables) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            [{name: render(row[name]) for name in self.variables} for row in self.rows], indent=2
        )


# ==========================================
# Pattern matching
# ==========================================


def _check_fixed(store: KnowledgeGraphStore, patterns: list[TriplePattern]) -> None:
    for pattern in patterns:
        for term in (pattern.subject, pattern.property, pattern.value):
            fixed = term.id if isinstance(term, ItemRef) else term
            if isinstance(fixed, EntityId) and fixed not in store:
                raise QueryError(f"Unknown entity {fixed}")
        if isinstance(pattern.property, EntityId):
            if store.get_entity(pattern.property).kind != "property":
                raise QueryError(f"{pattern.property} is not a property")


def _substitute(term, row: Row):
    if isinstance(term, Var) and term.name in row:
        return row[term.name]
    return term


def _bind(row: Row, term, value: Bound) -> Row | None:
    """``row`` extended so that ``term`` equals ``value``, or None on a mismatch."""
    if isinstance(value, ItemRef):
        value = value.id
    if isinstance(term, Var):
        bound = row.get(term.name)
        if bound is None:
            return {**row, term.name: value}
        return row if bound == value else None
    if isinstance(term, ItemRef):
        term = term.id
    if isinstance(term, TextLiteral):
        return row if not isinstance(value, EntityId) and lexical_value(value) == term.text else None
    return row if term == value else None


def _candidates(store: KnowledgeGraphStore, subject, property_id, value) -> list[EntityId]:
    if isinstance(subject, EntityId):
        return [subject] if subject in store else []
    if not isinstance(subject, Var):
        return []
    target = value.id if isinstance(value, ItemRef) else value
    if isinstance(target, EntityId):
        prop = property_id if isinstance(property_id, EntityId) else None
        return sorted({s for s, _ in store.referrers(target, prop)}, key=EntityId.sort_key)
    return [e.id for e in store.entities()]


def _match(store: KnowledgeGraphStore, pattern: TriplePattern, row: Row) -> Iterator[Row]:
    subject = _substitute(pattern.subject, row)
    property_id = _substitute(pattern.property, row)
    value = _substitute(pattern.value, row)
    for candidate in _candidates(store, subject, property_id, value):
        partial = _bind(row, pattern.subject, candidate)
        if partial is None:
            continue
        for statement in store.get_entity(candidate).statements:
            extended = _bind(partial, pattern.property, statement.property)
            if extended is None:
                continue
            extended = _bind(extended, pattern.value, statement.value)
            if extended is not None:
                yield extended


def select(store: KnowledgeGraphStore, patterns: list[TriplePattern]) -> BindingSet:
    """
    Every assignment of the patterns' variables that satisfies all patterns.

    Raises:
        QueryError: On an empty pattern list, a pattern set without variables
            or a fixed id the store does not know.
    """
    if not patterns:
        raise QueryError("A query needs at least one pattern")
    variables: list[str] = []
    for pattern in patterns:
        for var in pattern.variables():
            if var.name not in variables:
                variables.append(var.name)
    if not variables:
        raise QueryError("A query needs at least one variable")
    _check_fixed(store, patterns)

    rows: list[Row] = [{}]
    for pattern in patterns:
        rows = [extended for row in rows for extended in _match(store, pattern, row)]
        if not rows:
            break
    result = BindingSet.build(variables, rows)
    logger.debug(f"select over {len(patterns)} patterns -> {len(result)} rows")
    return result


# ==========================================
# Reachability
# ==========================================


def _neighbours(
    store: KnowledgeGraphStore, node: EntityId, property_id: EntityId, direction: Direction
) -> list[EntityId]:
    if direction == "forward":
        return [
            st.value.id
            for st in store.statements(node, property_id)
            if isinstance(st.value, ItemRef)
        ]
    return [subject for subject, _ in store.referrers(node, property_id)]


def transitive(
    store: KnowledgeGraphStore,
    start: EntityId,
    property_id: EntityId,
    direction: Direction = "forward",
) -> set[EntityId]:
    """
    Entities reachable from ``start`` over one or more ``property_id`` hops.
    ``inverse`` follows statements pointing at the frontier. ``start`` is
    only part of the result when a cycle leads back to it.

    Raises:
        QueryError: If ``start`` or ``property_id`` is unknown.
    """
    for entity_id in (start, property_id):
        if entity_id not in store:
            raise QueryError(f"Unknown entity {entity_id}")
    if store.get_entity(property_id).kind != "property":
        raise QueryError(f"{property_id} is not a property")
    if direction not in ("forward", "inverse"):
        raise QueryError(f"Unknown direction {direction!r}")

    reached: set[EntityId] = set()
    queue = deque([start])
    while queue:
        for neighbour in _neighbours(store, queue.popleft(), property_id, direction):
            if neighbour not in reached:
                reached.add(neighbour)
                queue.append(neighbour)
    return reached
