"""
Embedded Wikibase-model entity store.

Mutations are serialized through one re-entrant lock; readers get immutable
Entity snapshots and never block. The store is append/update only: ids are
allocated monotonically and never reused.
"""

import json
import logging
import threading
from collections import defaultdict
from pathlib import Path
from typing import Iterable, Mapping

from pydantic import ValidationError

from mathkg.core.exceptions import (
    CompletenessDowngradeError,
    DatatypeMismatchError,
    DuplicateExternalIdError,
    InvalidFormulaError,
    LabelCollisionError,
    MappingConflictError,
    StoreError,
    UnknownEntityError,
)
from mathkg.core.paths import ProjectPaths as PP
from mathkg.formula.diagnostics import Diagnostic
from mathkg.formula.parser import parse_texvc
from mathkg.kg.identifiers import ExternalIdRegistry, default_id_registry
from mathkg.kg.models import (
    Completeness,
    Datatype,
    Entity,
    EntityId,
    EntityKind,
    ExternalIdVal,
    IdMapping,
    ItemRef,
    MathVal,
    Statement,
    StatementHandle,
    StatementValue,
)
from mathkg.mathml.macros import MacroTable, default_macro_table

logger = logging.getLogger(__name__)


class KnowledgeGraphStore:
    def __init__(
        self,
        *,
        macro_table: MacroTable | None = None,
        id_registry: ExternalIdRegistry | None = None,
    ):
        self.macro_table = macro_table or default_macro_table()
        self.id_registry = id_registry or default_id_registry()
        self._lock = threading.RLock()
        self._entities: dict[EntityId, Entity] = {}
        self._next = {"item": 1, "property": 1}
        self._labels: dict[tuple[str, str, str], EntityId] = {}
        self._external: dict[tuple[str, str], EntityId] = {}
        self._referrers: dict[EntityId, set[tuple[EntityId, EntityId]]] = defaultdict(set)
        self._mappings: dict[tuple[str, str], IdMapping] = {}
        self._mapped_locals: dict[tuple[str, EntityId], str] = {}

    # ==========================================
    # Reads
    # ==========================================

    def __contains__(self, entity_id: object) -> bool:
        return entity_id in self._entities

    def __len__(self) -> int:
        return len(self._entities)

    def get_entity(self, entity_id: EntityId | str) -> Entity:
        if isinstance(entity_id, str):
            entity_id = EntityId.parse(entity_id)
        try:
            return self._entities[entity_id]
        except KeyError:
            raise UnknownEntityError(f"Unknown entity {entity_id}") from None

    def entities(self, kind: EntityKind | None = None) -> list[Entity]:
        snapshot = list(self._entities.values())
        return sorted(
            (e for e in snapshot if kind is None or e.kind == kind), key=lambda e: e.id.sort_key()
        )

    def statements(self, subject: EntityId, property_id: EntityId | None = None) -> list[Statement]:
        entity = self.get_entity(subject)
        if property_id is None:
            return list(entity.statements)
        return entity.statements_for(property_id)

    def has_statement(self, subject: EntityId, statement: Statement) -> bool:
        entity = self._entities.get(subject)
        return entity is not None and any(st.same_claim(statement) for st in entity.statements)

    def find_by_label(
        self, label: str, language: str = "en", kind: EntityKind | None = None
    ) -> list[EntityId]:
        """Entities whose label or one of whose aliases equals ``label``."""
        found = {
            entity.id
            for entity in list(self._entities.values())
            if (kind is None or entity.kind == kind) and label in entity.names(language)
        }
        return sorted(found, key=EntityId.sort_key)

    def referrers(
        self, target: EntityId, property_id: EntityId | None = None
    ) -> list[tuple[EntityId, EntityId]]:
        """``(subject, property)`` pairs of statements whose value is ``target``."""
        pairs = self._referrers.get(target, set())
        return sorted(
            (pair for pair in pairs if property_id is None or pair[1] == property_id),
            key=lambda pair: (pair[0].sort_key(), pair[1].sort_key()),
        )

    def resolve_external(self, type_name: str, value: str) -> EntityId | None:
        """
        The entity carrying an external identifier, or None.

        Raises:
            ExternalIdError: If the type is not registered or the value fails
                the type's pattern.
        """
        self.id_registry.check(type_name, value)
        return self._external.get((type_name, value))

    def owner_of_external(self, type_name: str, value: str) -> EntityId | None:
        """Like resolve_external but without registry checks."""
        return self._external.get((type_name, value))

    def get_mapping(self, source: str, upstream: str) -> tuple[EntityId, Completeness] | None:
        row = self._mappings.get((source, upstream))
        return (row.local, row.completeness) if row is not None else None

    def mappings(self) -> list[IdMapping]:
        return sorted(self._mappings.values(), key=lambda m: (m.source, m.upstream))

    @property
    def statement_count(self) -> int:
        return sum(len(e.statements) for e in list(self._entities.values()))

    @property
    def triple_count(self) -> int:
        """Statements, qualifiers and terms (labels, descriptions, aliases)."""
        return sum(
            len(e.statements) + sum(len(st.qualifiers) for st in e.statements) + e.term_count()
            for e in list(self._entities.values())
        )

    # ==========================================
    # Writes
    # ==========================================

    def _check_labels(self, kind: str, labels: Mapping[str, str]) -> None:
        for language, label in labels.items():
            owner = self._labels.get((language, kind, label))
            if owner is not None:
                raise LabelCollisionError(
                    f"{kind.capitalize()} label {label!r} ({language}) already used by {owner}"
                )

    def create_entity(
        self,
        kind: EntityKind,
        labels: Mapping[str, str],
        descriptions: Mapping[str, str] | None = None,
        aliases: Mapping[str, Iterable[str]] | None = None,
        datatype: Datatype | None = None,
    ) -> EntityId:
        """
        Allocates the next id of ``kind`` and stores a statement-free entity.

        Raises:
            LabelCollisionError: If a label is taken in its language by an entity of the same kind.
            DatatypeMismatchError: If a property lacks a datatype or an item has one.
        """
        if kind == "property" and datatype is None:
            raise DatatypeMismatchError("A property needs a datatype")
        if kind == "item" and datatype is not None:
            raise DatatypeMismatchError("An item cannot have a datatype")

        with self._lock:
            self._check_labels(kind, labels)
            entity_id = EntityId(kind=kind, number=self._next[kind])
            entity = Entity(
                id=entity_id,
                kind=kind,
                labels=dict(labels),
                descriptions=dict(descriptions or {}),
                aliases={lang: list(values) for lang, values in (aliases or {}).items()},
                datatype=datatype,
            )
            self._next[kind] += 1
            self._entities[entity_id] = entity
            for language, label in entity.labels.items():
                self._labels[(language, kind, label)] = entity_id
        logger.debug(f"Created {entity_id} ({entity.label()})")
        return entity_id

    def _check_value(self, property_id: EntityId, value: StatementValue) -> None:
        prop = self._entities.get(property_id)
        if prop is None or prop.kind != "property":
            raise UnknownEntityError(f"Unknown property {property_id}")
        if prop.datatype != value.type:
            raise DatatypeMismatchError(
                f"{property_id} ({prop.label()}) expects {prop.datatype}, got {value.type}"
            )
        if isinstance(value, ItemRef) and value.id not in self._entities:
            raise UnknownEntityError(f"Statement refers to unknown entity {value.id}")
        if isinstance(value, MathVal):
            result = parse_texvc(value.texvc, macros=self.macro_table.nodes)
            if isinstance(result, Diagnostic):
                raise InvalidFormulaError(value.texvc, result)
        if isinstance(value, ExternalIdVal) and value.id_type in self.id_registry:
            self.id_registry.check(value.id_type, value.value)

    def add_statement(self, subject: EntityId, statement: Statement) -> StatementHandle:
        """
        Appends a statement; an existing one with the same property and value
        is kept and its handle returned.

        Raises:
            UnknownEntityError: Unknown subject, property or referenced item.
            DatatypeMismatchError: The value does not fit the property's datatype.
            InvalidFormulaError: A math value does not parse.
            ExternalIdError: A registered identifier fails its pattern.
            DuplicateExternalIdError: The identifier belongs to another entity.
        """
        with self._lock:
            entity = self.get_entity(subject)
            for index, existing in enumerate(entity.statements):
                if existing.same_claim(statement):
                    return StatementHandle(subject=subject, index=index)

            self._check_value(statement.property, statement.value)
            for qualifier in statement.qualifiers:
                self._check_value(qualifier.property, qualifier.value)

            value = statement.value
            if isinstance(value, ExternalIdVal):
                owner = self._external.get((value.id_type, value.value))
                if owner is not None and owner != subject:
                    raise DuplicateExternalIdError(
                        f"{value.id_type} {value.value!r} already identifies {owner}"
                    )

            self._entities[subject] = entity.model_copy(
                update={"statements": (*entity.statements, statement)}
            )
            self._index_statement(subject, statement)
            return StatementHandle(subject=subject, index=len(entity.statements))

    def _index_statement(self, subject: EntityId, statement: Statement) -> None:
        value = statement.value
        if isinstance(value, ItemRef):
            self._referrers[value.id].add((subject, statement.property))
        elif isinstance(value, ExternalIdVal):
            self._external[(value.id_type, value.value)] = subject

    def record_mapping(
        self, local: EntityId, source: str, upstream: str, completeness: Completeness
    ) -> None:
        """
        Upserts a mapping row. ``full`` upgrades a ``stub`` row; the reverse is refused.

        Raises:
            UnknownEntityError: If ``local`` does not exist.
            MappingConflictError: If either side is already mapped elsewhere.
            CompletenessDowngradeError: On a full to stub transition.
        """
        with self._lock:
            self.get_entity(local)
            existing = self._mappings.get((source, upstream))
            if existing is not None:
                if existing.local != local:
                    raise MappingConflictError(
                        f"{source}:{upstream} is already mapped to {existing.local}, not {local}"
                    )
                if existing.completeness == "full" and completeness == "stub":
                    raise CompletenessDowngradeError(
                        f"{source}:{upstream} is fully imported; refusing to mark it stub"
                    )
            mapped = self._mapped_locals.get((source, local))
            if mapped is not None and mapped != upstream:
                raise MappingConflictError(
                    f"{local} is already mapped to {source}:{mapped}, not {upstream}"
                )
            self._mappings[(source, upstream)] = IdMapping(
                local=local, source=source, upstream=upstream, completeness=completeness
            )
            self._mapped_locals[(source, local)] = upstream

    # ==========================================
    # Persistence
    # ==========================================

    def export_store(self, directory: str | Path) -> None:
        """Writes the entity and mapping JSON-lines files, creating ``directory``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with self._lock:
            entity_lines = [
                e.model_dump_json(exclude_none=True) + "\n" for e in self.entities()
            ]
            mapping_lines = [m.model_dump_json() + "\n" for m in self.mappings()]
        (directory / PP.ENTITIES_FILE_NAME).write_text("".join(entity_lines), encoding="utf-8")
        (directory / PP.MAPPINGS_FILE_NAME).write_text("".join(mapping_lines), encoding="utf-8")
        logger.info(
            f"Exported {len(entity_lines)} entities and {len(mapping_lines)} mappings to {directory}"
        )

    def import_store(self, directory: str | Path) -> None:
        """
        Loads the files written by export_store into this (empty) store.

        Raises:
            StoreError: If the store is not empty or a line is malformed.
        """
        directory = Path(directory)
        with self._lock:
            if self._entities:
                raise StoreError("import_store needs an empty store")
            try:
                entities = [
                    Entity.model_validate_json(line)
                    for line in _jsonl(directory / PP.ENTITIES_FILE_NAME)
                ]
                mappings = [
                    IdMapping.model_validate_json(line)
                    for line in _jsonl(directory / PP.MAPPINGS_FILE_NAME)
                ]
            except ValidationError as e:
                raise StoreError(f"Malformed store files in {directory}: {e}") from e

            for entity in entities:
                if entity.id in self._entities:
                    raise StoreError(f"Duplicate entity {entity.id} in {directory}")
                self._check_labels(entity.kind, entity.labels)
                self._entities[entity.id] = entity
                for language, label in entity.labels.items():
                    self._labels[(language, entity.kind, label)] = entity.id
                self._next[entity.kind] = max(self._next[entity.kind], entity.id.number + 1)
            for entity in entities:
                for statement in entity.statements:
                    value = statement.value
                    if isinstance(value, ItemRef) and value.id not in self._entities:
                        raise StoreError(f"{entity.id} refers to missing entity {value.id}")
                    self._index_statement(entity.id, statement)
            for mapping in mappings:
                self.record_mapping(
                    mapping.local, mapping.source, mapping.upstream, mapping.completeness
                )
        logger.info(
            f"Imported {len(entities)} entities and {len(mappings)} mappings from {directory}"
        )

    def save(self, directory: str | Path) -> None:
        self.export_store(directory)


def _jsonl(path: Path) -> list[str]:
    if not path.exists():
        return []
    lines = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            json.loads(line)
        except json.JSONDecodeError as e:
            raise StoreError(f"{path.name}:{number}: {e}") from e
        lines.append(line)
    return lines


def open_store(directory: str | Path, **kwargs) -> KnowledgeGraphStore:
    """A store loaded from ``directory``; empty when nothing was saved there yet."""
    store = KnowledgeGraphStore(**kwargs)
    if (Path(directory) / PP.ENTITIES_FILE_NAME).exists():
        store.import_store(directory)
    return store
