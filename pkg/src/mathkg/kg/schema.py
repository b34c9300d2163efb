"""Core properties, created lazily: a property is only defined when absent."""

import logging
from typing import Iterable

from mathkg.core.exceptions import DatatypeMismatchError
from mathkg.kg.models import Datatype, EntityId
from mathkg.kg.store import KnowledgeGraphStore

logger = logging.getLogger(__name__)


class CoreProperties:
    """English labels of the properties every import relies on."""

    WIKIDATA_QID = "wikidata QID"
    WIKIDATA_PID = "wikidata PID"
    USES = "uses symbol concept"
    DEFINING_FORMULA = "defining formula"
    INSTANCE_OF = "instance of"
    TITLE = "title"
    AUTHOR = "author"
    AUTHOR_NAME = "author name string"
    PUBLICATION_DATE = "publication date"
    PUBLISHED_IN = "published in"
    VERSION = "version"
    LICENSE = "license"
    OFFICIAL_WEBSITE = "official website"
    DEPENDS_ON = "depends on software"
    DESCRIBED_AT = "described at URL"
    MSC_CLASSIFICATION = "MSC classification"


CORE_PROPERTIES: list[tuple[str, Datatype, tuple[str, ...]]] = [
    (CoreProperties.WIKIDATA_QID, "external-id", ()),
    (CoreProperties.WIKIDATA_PID, "external-id", ()),
    (CoreProperties.USES, "item", ("uses",)),
    (CoreProperties.DEFINING_FORMULA, "math", ()),
    (CoreProperties.INSTANCE_OF, "item", ()),
    (CoreProperties.TITLE, "string", ()),
    (CoreProperties.AUTHOR, "item", ()),
    (CoreProperties.AUTHOR_NAME, "string", ()),
    (CoreProperties.PUBLICATION_DATE, "time", ()),
    (CoreProperties.PUBLISHED_IN, "string", ()),
    (CoreProperties.VERSION, "string", ()),
    (CoreProperties.LICENSE, "string", ()),
    (CoreProperties.OFFICIAL_WEBSITE, "url", ()),
    (CoreProperties.DEPENDS_ON, "item", ()),
    (CoreProperties.DESCRIBED_AT, "url", ()),
    (CoreProperties.MSC_CLASSIFICATION, "string", ()),
]

# Identifier types that are not registered but still get their own property.
UNREGISTERED_ID_PROPERTIES = {"wikidata": CoreProperties.WIKIDATA_QID}


def find_property(store: KnowledgeGraphStore, label: str) -> EntityId | None:
    found = store.find_by_label(label, kind="property")
    return found[0] if found else None


def ensure_property(
    store: KnowledgeGraphStore,
    label: str,
    datatype: Datatype,
    aliases: Iterable[str] = (),
) -> EntityId:
    """
    The property labelled ``label``, created with ``datatype`` when absent.

    Raises:
        DatatypeMismatchError: If the existing property has another datatype.
    """
    existing = store.find_by_label(label, kind="property")
    for property_id in existing:
        prop = store.get_entity(property_id)
        if prop.label() == label:
            if prop.datatype != datatype:
                raise DatatypeMismatchError(
                    f"Property {label!r} exists as {prop.datatype}, not {datatype}"
                )
            return property_id
    aliases = tuple(aliases)
    property_id = store.create_entity(
        "property", {"en": label}, aliases={"en": aliases} if aliases else None, datatype=datatype
    )
    logger.info(f"Defined property {property_id} ({label}, {datatype})")
    return property_id


def property_for_id_type(store: KnowledgeGraphStore, id_type: str) -> EntityId:
    """The external-id property that holds identifiers of ``id_type``."""
    label = UNREGISTERED_ID_PROPERTIES.get(id_type, id_type)
    return ensure_property(store, label, "external-id")


def bootstrap_core_properties(store: KnowledgeGraphStore) -> dict[str, EntityId]:
    """Defines every core and identifier property; returns them by label."""
    created = {
        label: ensure_property(store, label, datatype, aliases)
        for label, datatype, aliases in CORE_PROPERTIES
    }
    for id_type in store.id_registry:
        created[id_type.name] = ensure_property(store, id_type.name, "external-id")
    return created


def ensure_item(store: KnowledgeGraphStore, label: str, description: str = "") -> EntityId:
    """A local item found by its exact English label, created when missing."""
    for item_id in store.find_by_label(label, kind="item"):
        if store.get_entity(item_id).label() == label:
            return item_id
    return store.create_entity("item", {"en": label}, {"en": description} if description else None)
