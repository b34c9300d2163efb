"""
Wikidata ``Special:EntityData`` JSON.

Models for the wire format plus the translation of one entity into an
UpstreamRecord, with upstream property ids replaced by local property
labels through the property map.
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandera.pandas as pa
from pydantic import BaseModel, ConfigDict, Field

from mathkg.core.exceptions import RecordParseError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.core.tables import read_tsv_table
from mathkg.importer.records import UpstreamItemRef, UpstreamRecord, UpstreamStatement
from mathkg.kg.models import (
    DATATYPES,
    Datatype,
    ExternalIdVal,
    MathVal,
    StringVal,
    TimeVal,
    UrlVal,
)
from mathkg.kg.schema import CoreProperties

logger = logging.getLogger(__name__)

WIKIDATA_SOURCE = "wikidata"

# Wikibase property datatypes and the local datatype each one maps to.
WIKIDATA_DATATYPES: Dict[str, Datatype] = {
    "wikibase-item": "item",
    "string": "string",
    "monolingualtext": "string",
    "external-id": "external-id",
    "math": "math",
    "url": "url",
    "time": "time",
}


class WikidataTerm(BaseModel):
    language: str
    value: str


class WikidataSnak(BaseModel):
    snaktype: str
    property: str
    datatype: Optional[str] = None
    datavalue: Optional[Dict[str, Any]] = None


class WikidataClaim(BaseModel):
    mainsnak: WikidataSnak
    type: Optional[str] = None
    rank: Optional[str] = None
    qualifiers: Optional[Dict[str, List[WikidataSnak]]] = None


class WikidataEntity(BaseModel):
    model_config = ConfigDict(extra="ignore")

    id: str = Field(..., description="Entity ID (e.g., 'Q123' or 'P31')")
    type: str = Field("item", description="Entity type ('item' or 'property')")
    datatype: Optional[str] = None
    labels: Dict[str, WikidataTerm] = Field(default_factory=dict)
    descriptions: Dict[str, WikidataTerm] = Field(default_factory=dict)
    aliases: Dict[str, List[WikidataTerm]] = Field(default_factory=dict)
    claims: Dict[str, List[WikidataClaim]] = Field(default_factory=dict)


class EntityData(BaseModel):
    """The top-level ``{"entities": {...}}`` document."""

    model_config = ConfigDict(extra="ignore")

    entities: Dict[str, WikidataEntity]


# ==========================================
# Upstream property map
# ==========================================

PROPERTY_MAP_COLUMNS = ["upstream", "local_label", "datatype"]

PROPERTY_MAP_SCHEMA = pa.DataFrameSchema(
    {
        "upstream": pa.Column(str, pa.Check.str_matches(r"^P[1-9][0-9]*$"), unique=True),
        "local_label": pa.Column(str, pa.Check.str_length(min_value=1)),
        "datatype": pa.Column(str, pa.Check.isin(list(DATATYPES))),
    },
    strict=True,
)


class PropertyMap(BaseModel):
    """Upstream property id -> (local label, datatype)."""

    model_config = ConfigDict(frozen=True)

    entries: Dict[str, tuple[str, Datatype]]

    def get(self, upstream: str) -> tuple[str, Datatype] | None:
        return self.entries.get(upstream)

    @classmethod
    def from_file(cls, path: str | Path) -> "PropertyMap":
        df = read_tsv_table(path, PROPERTY_MAP_COLUMNS, PROPERTY_MAP_SCHEMA)
        return cls(
            entries={
                row["upstream"]: (row["local_label"], row["datatype"]) for _, row in df.iterrows()
            }
        )


@lru_cache(maxsize=1)
def default_property_map() -> PropertyMap:
    return PropertyMap.from_file(PP.PROPERTY_MAP)


# ==========================================
# Translation
# ==========================================


def _value(snak: WikidataSnak, label: str, datatype: Datatype):
    """The local value of a snak, or None when the snak carries no value."""
    if snak.snaktype != "value" or snak.datavalue is None:
        return None
    raw = snak.datavalue.get("value")
    kind = snak.datavalue.get("type")
    if kind == "wikibase-entityid":
        if datatype != "item":
            raise RecordParseError(f"{snak.property} holds an entity, not {datatype}")
        return UpstreamItemRef(source=WIKIDATA_SOURCE, upstream=raw["id"])
    if kind == "time":
        return TimeVal(value=raw["time"])
    if kind == "monolingualtext":
        raw = raw["text"]
    if not isinstance(raw, str):
        raise RecordParseError(f"Unsupported {kind} value for {snak.property}")
    if datatype == "external-id":
        return ExternalIdVal(id_type=label, value=raw)
    if datatype == "math":
        return MathVal(texvc=raw)
    if datatype == "url":
        return UrlVal(value=raw)
    if datatype == "string":
        return StringVal(value=raw)
    raise RecordParseError(f"{snak.property} holds a string, not {datatype}")


def to_upstream_record(
    entity: WikidataEntity, property_map: PropertyMap | None = None
) -> UpstreamRecord:
    """
    Translates one Wikidata entity.

    Property entities become property records with the local datatype of
    their Wikibase datatype. Claims on unmapped properties are skipped with
    a warning. The record always starts with its own ``wikidata QID``
    identifier statement.

    Raises:
        RecordParseError: For a property whose datatype has no local
            counterpart, or a claim value that does not fit its property.
    """
    property_map = property_map or default_property_map()
    kind, own_datatype = "item", None
    if entity.type == "property":
        own_datatype = WIKIDATA_DATATYPES.get(entity.datatype or "")
        if own_datatype is None:
            raise RecordParseError(f"Unsupported property datatype {entity.datatype!r}", entity.id)
        kind = "property"
    statements = [
        UpstreamStatement(
            property=CoreProperties.WIKIDATA_QID,
            datatype="external-id",
            value=ExternalIdVal(id_type=WIKIDATA_SOURCE, value=entity.id),
        )
    ]
    for pid in sorted(entity.claims, key=lambda p: int(p[1:]) if p[1:].isdigit() else 0):
        mapped = property_map.get(pid)
        if mapped is None:
            logger.warning(f"{entity.id}: skipping unmapped upstream property {pid}")
            continue
        label, datatype = mapped
        for claim in entity.claims[pid]:
            value = _value(claim.mainsnak, label, datatype)
            if value is None:
                continue
            qualifiers = []
            for qpid, snaks in sorted((claim.qualifiers or {}).items()):
                qmapped = property_map.get(qpid)
                if qmapped is None:
                    logger.warning(f"{entity.id}: skipping unmapped qualifier {qpid}")
                    continue
                for snak in snaks:
                    qvalue = _value(snak, *qmapped)
                    if qvalue is not None:
                        qualifiers.append((qmapped[0], qmapped[1], qvalue))
            statements.append(
                UpstreamStatement(
                    property=label, datatype=datatype, value=value, qualifiers=tuple(qualifiers)
                )
            )

    return UpstreamRecord(
        source=WIKIDATA_SOURCE,
        upstream_id=entity.id,
        kind=kind,
        labels={lang: term.value for lang, term in entity.labels.items()},
        descriptions={lang: term.value for lang, term in entity.descriptions.items()},
        aliases={lang: [term.value for term in terms] for lang, terms in entity.aliases.items()},
        statements=tuple(statements),
        datatype=own_datatype,
    )
