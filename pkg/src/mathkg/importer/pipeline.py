"""
Import pipeline: fetch, parse and categorize, upload.

``import_entity`` follows references breadth-first up to a depth;
``run_datasource`` loads a whole datasource file through its RecordParser.
"""

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from pydantic import BaseModel, Field

from mathkg.core.exceptions import ImportFailure, MathKGError
from mathkg.importer.connectors import SourceConnector
from mathkg.importer.parsers import ParserFactory, RecordParser
from mathkg.importer.records import UpstreamItemRef, UpstreamRecord, UpstreamStatement
from mathkg.kg.models import EntityId, ExternalIdVal, ItemRef, Qualifier, Statement
from mathkg.kg.schema import (
    CoreProperties,
    bootstrap_core_properties,
    ensure_item,
    ensure_property,
    property_for_id_type,
)
from mathkg.kg.store import KnowledgeGraphStore

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 1


class ImportReport(BaseModel):
    created: int = 0
    updated: int = 0
    deduplicated: int = 0
    errors: list[str] = Field(default_factory=list)
    warnings: list[str] = Field(default_factory=list)
    candidates: list[str] = Field(default_factory=list)

    def merge(self, other: "ImportReport") -> "ImportReport":
        return ImportReport(
            created=self.created + other.created,
            updated=self.updated + other.updated,
            deduplicated=self.deduplicated + other.deduplicated,
            errors=self.errors + other.errors,
            warnings=self.warnings + other.warnings,
            candidates=self.candidates + other.candidates,
        )

    def to_json(self) -> str:
        return json.dumps(self.model_dump(), indent=2, sort_keys=True)


def _upstream_key(upstream_id: str) -> tuple:
    """Natural order: ``Q9`` before ``Q10``."""
    return tuple(int(part) if part.isdigit() else part for part in re.split(r"(\d+)", upstream_id))


def _resolve(store: KnowledgeGraphStore, ref: UpstreamItemRef) -> EntityId | None:
    mapped = store.get_mapping(ref.source, ref.upstream)
    return mapped[0] if mapped is not None else None


def _local_value(store: KnowledgeGraphStore, value):
    if isinstance(value, UpstreamItemRef):
        local = _resolve(store, value)
        return ItemRef(id=local) if local is not None else None
    return value


def _local_statement(store: KnowledgeGraphStore, statement: UpstreamStatement) -> Statement | None:
    """The statement with upstream references rewritten, or None when one is unresolved."""
    value = _local_value(store, statement.value)
    if value is None:
        return None
    qualifiers = []
    for label, datatype, raw in statement.qualifiers:
        qvalue = _local_value(store, raw)
        if qvalue is None:
            return None
        qualifiers.append(Qualifier(property=ensure_property(store, label, datatype), value=qvalue))
    if isinstance(value, ExternalIdVal):
        property_id = property_for_id_type(store, value.id_type)
    else:
        property_id = ensure_property(store, statement.property, statement.datatype)
    return Statement(property=property_id, value=value, qualifiers=tuple(qualifiers))


def _identity(store: KnowledgeGraphStore, record: UpstreamRecord) -> Statement:
    primary = record.identifiers[0]
    return Statement(property=property_for_id_type(store, primary.id_type), value=primary)


def _existing_owner(store: KnowledgeGraphStore, record: UpstreamRecord) -> EntityId | None:
    mapped = store.get_mapping(record.source, record.upstream_id)
    if mapped is not None:
        return mapped[0]
    primary = record.identifiers[0]
    if primary.id_type in store.id_registry:
        return store.resolve_external(primary.id_type, primary.value)
    return store.owner_of_external(primary.id_type, primary.value)


def _create(store: KnowledgeGraphStore, record: UpstreamRecord) -> EntityId:
    local = store.create_entity(
        record.kind,
        record.labels or {"en": f"{record.source}:{record.upstream_id}"},
        record.descriptions,
        record.aliases,
        record.datatype,
    )
    store.add_statement(local, _identity(store, record))
    return local


# ==========================================
# Depth-controlled import from a connector
# ==========================================


def import_entity(
    store: KnowledgeGraphStore,
    connector: SourceConnector,
    upstream_id: str,
    depth: int = DEFAULT_DEPTH,
    *,
    workers: int = 4,
) -> EntityId:
    """
    Imports ``upstream_id`` and its neighbourhood.

    A node at distance ``d`` from the target gets its full statements when
    ``d < depth`` and only its terms (a stub) when ``d == depth``. Full
    entities are never touched again and never downgraded.

    Raises:
        FetchError: If any record within reach cannot be fetched.
        MappingConflictError: If an upstream id and a local entity disagree.
    """
    if depth < 0:
        raise ValueError(f"depth must be >= 0, got {depth}")

    remaining: dict[str, int] = {}
    records: dict[str, UpstreamRecord] = {}
    order: list[str] = []
    frontier = [upstream_id]
    distance = 0
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        while frontier:
            fetched = list(executor.map(connector.fetch, frontier))
            next_frontier: set[str] = set()
            for uid, record in zip(frontier, fetched):
                remaining[uid] = depth - distance
                records[uid] = record
                order.append(uid)
                if remaining[uid] < 1:
                    continue
                for ref in record.references():
                    if ref.source == connector.source and ref.upstream not in remaining:
                        next_frontier.add(ref.upstream)
            next_frontier -= set(frontier)
            frontier = sorted(next_frontier, key=_upstream_key)
            distance += 1
    logger.info(f"Fetched {len(order)} {connector.source} records around {upstream_id} at depth {depth}")

    for uid in order:
        record = records[uid]
        local = _existing_owner(store, record)
        if local is None:
            local = _create(store, record)
            logger.debug(f"Created {local} for {connector.source}:{uid}")
        if store.get_mapping(connector.source, uid) is None:
            store.add_statement(local, _identity(store, record))
            store.record_mapping(local, connector.source, uid, "stub")

    for uid in order:
        if remaining[uid] < 1:
            continue
        local, completeness = store.get_mapping(connector.source, uid)  # type: ignore[misc]
        if completeness == "full":
            continue
        for upstream_statement in records[uid].statements:
            statement = _local_statement(store, upstream_statement)
            if statement is None:
                logger.warning(f"{connector.source}:{uid}: unresolved reference in {upstream_statement.property!r}")
                continue
            store.add_statement(local, statement)
        store.record_mapping(local, connector.source, uid, "full")

    return store.get_mapping(connector.source, upstream_id)[0]  # type: ignore[index]


# ==========================================
# Datasource runs
# ==========================================


def run_datasource(
    store: KnowledgeGraphStore, parser: RecordParser, input_path: str | Path
) -> ImportReport:
    """
    Loads one datasource file. Records are deduplicated on their first
    external identifier, then their statements are added once every record
    of the file has a local entity.
    """
    input_path = Path(input_path)
    if not input_path.is_file():
        raise ImportFailure(f"Input file not found: {input_path}")
    logger.info(f"Running {parser.source} parser over {input_path.name}")

    parsed, parse_errors = parser.parse_with_errors(input_path.read_bytes())
    report = ImportReport(
        errors=[f"{input_path.name}: {e.record_ref or '-'}: {e}" for e in parse_errors]
    )

    resolved: list[tuple[UpstreamRecord, EntityId, bool]] = []
    for category, record in parsed:
        try:
            local = _existing_owner(store, record)
            created = local is None
            if local is None:
                local = _create(store, record)
                if record.kind == "item":
                    instance = ensure_property(store, CoreProperties.INSTANCE_OF, "item")
                    store.add_statement(local, Statement(property=instance, value=ItemRef(id=ensure_item(store, category))))
            store.record_mapping(local, record.source, record.upstream_id, "full")
        except MathKGError as e:
            logger.error(f"Error importing {record.source}:{record.upstream_id}: {e}")
            report.errors.append(f"{input_path.name}: {record.upstream_id}: {e}")
            continue
        if created:
            report.created += 1
        else:
            report.deduplicated += 1
        resolved.append((record, local, created))

    for record, local, created in resolved:
        before = len(store.get_entity(local).statements)
        for upstream_statement in record.statements:
            statement = _local_statement(store, upstream_statement)
            if statement is None:
                message = f"{record.source}:{record.upstream_id}: unresolved reference in {upstream_statement.property!r}"
                logger.warning(message)
                report.warnings.append(message)
                continue
            value = statement.value
            if isinstance(value, ExternalIdVal):
                owner = store.owner_of_external(value.id_type, value.value)
                if owner is not None and owner != local:
                    report.candidates.append(f"{local}\t{owner}\t{value.id_type}\t{value.value}")
                    continue
            try:
                store.add_statement(local, statement)
            except MathKGError as e:
                logger.error(f"Error importing {record.source}:{record.upstream_id}: {e}")
                report.errors.append(f"{input_path.name}: {record.upstream_id}: {e}")
        if not created and len(store.get_entity(local).statements) > before:
            report.updated += 1

    logger.info(
        f"{input_path.name}: created={report.created} deduplicated={report.deduplicated} "
        f"updated={report.updated} errors={len(report.errors)}"
    )
    return report


def seed(store: KnowledgeGraphStore, fixture_dir: str | Path) -> ImportReport:
    """Runs every recognised datasource file of ``fixture_dir`` in name order."""
    fixture_dir = Path(fixture_dir)
    if not fixture_dir.is_dir():
        raise ImportFailure(f"Fixture directory not found: {fixture_dir}")
    bootstrap_core_properties(store)
    report = ImportReport()
    for path in sorted(p for p in fixture_dir.iterdir() if p.is_file()):
        if not ParserFactory.supports(path):
            logger.debug(f"Skipping unrecognised file {path.name}")
            continue
        parser = ParserFactory.for_path(
            path, id_registry=store.id_registry, macro_table=store.macro_table
        )
        report = report.merge(run_datasource(store, parser, path))
    return report
