from mathkg.kg.identifiers import ExternalIdRegistry, ExternalIdType, default_id_registry
from mathkg.kg.models import (
    Entity,
    EntityId,
    ExternalIdVal,
    IdMapping,
    ItemRef,
    MathVal,
    Qualifier,
    Statement,
    StatementHandle,
    StatementValue,
    StringVal,
    TimeVal,
    UrlVal,
)
from mathkg.kg.schema import (
    CoreProperties,
    bootstrap_core_properties,
    ensure_item,
    ensure_property,
    find_property,
)
from mathkg.kg.store import KnowledgeGraphStore, open_store

__all__ = [
    "CoreProperties",
    "Entity",
    "EntityId",
    "ExternalIdRegistry",
    "ExternalIdType",
    "ExternalIdVal",
    "IdMapping",
    "ItemRef",
    "KnowledgeGraphStore",
    "MathVal",
    "Qualifier",
    "Statement",
    "StatementHandle",
    "StatementValue",
    "StringVal",
    "TimeVal",
    "UrlVal",
    "bootstrap_core_properties",
    "default_id_registry",
    "ensure_item",
    "ensure_property",
    "find_property",
    "open_store",
]
