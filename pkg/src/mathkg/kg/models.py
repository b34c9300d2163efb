"""
Wikibase data model: entity ids, statement values, entities and id mappings.

Everything here is an immutable pydantic model; the store hands these out as
snapshots. JSON shapes follow the entity and mapping files of the store.
"""

from __future__ import annotations

import re
from typing import Annotated, Any, Literal, Union

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PositiveInt,
    model_serializer,
    model_validator,
)

EntityKind = Literal["item", "property"]
Datatype = Literal["item", "string", "external-id", "math", "url", "time"]
Completeness = Literal["full", "stub"]

DATATYPES: tuple[str, ...] = ("item", "string", "external-id", "math", "url", "time")
DEFAULT_LANGUAGE = "en"

_ENTITY_ID = re.compile(r"^([QP])([1-9][0-9]*)$")
_PREFIX = {"item": "Q", "property": "P"}
_KIND = {"Q": "item", "P": "property"}


class EntityId(BaseModel):
    """``Q<number>`` for items, ``P<number>`` for properties. Serializes as that string."""

    model_config = ConfigDict(frozen=True)

    kind: EntityKind
    number: PositiveInt

    @model_validator(mode="before")
    @classmethod
    def _from_string(cls, data: Any) -> Any:
        if isinstance(data, str):
            match = _ENTITY_ID.match(data.strip())
            if match is None:
                raise ValueError(f"Not an entity id: {data!r}")
            return {"kind": _KIND[match.group(1)], "number": int(match.group(2))}
        return data

    @model_serializer
    def _to_string(self) -> str:
        return str(self)

    @classmethod
    def parse(cls, text: str) -> EntityId:
        return cls.model_validate(text)

    @staticmethod
    def is_entity_id(text: str) -> bool:
        return _ENTITY_ID.match(text) is not None

    def __str__(self) -> str:
        return f"{_PREFIX[self.kind]}{self.number}"

    def sort_key(self) -> tuple[int, int]:
        return (0 if self.kind == "item" else 1, self.number)

    def __lt__(self, other: EntityId) -> bool:
        return self.sort_key() < other.sort_key()


# ==========================================
# Statement values
# ==========================================


class _Value(BaseModel):
    model_config = ConfigDict(frozen=True)


class ItemRef(_Value):
    type: Literal["item"] = "item"
    id: EntityId


class StringVal(_Value):
    type: Literal["string"] = "string"
    value: str


class ExternalIdVal(_Value):
    type: Literal["external-id"] = "external-id"
    id_type: str = Field(min_length=1)
    value: str = Field(min_length=1)


class MathVal(_Value):
    type: Literal["math"] = "math"
    texvc: str


class UrlVal(_Value):
    type: Literal["url"] = "url"
    value: str = Field(pattern=r"^[A-Za-z][A-Za-z0-9+.-]*:\S+$")


class TimeVal(_Value):
    type: Literal["time"] = "time"
    value: str = Field(
        pattern=r"^[+-]?[0-9]{4,}-[0-9]{2}-[0-9]{2}(?:T[0-9]{2}:[0-9]{2}:[0-9]{2}Z)?$"
    )


StatementValue = Annotated[
    Union[ItemRef, StringVal, ExternalIdVal, MathVal, UrlVal, TimeVal],
    Field(discriminator="type"),
]


def lexical_value(value: StatementValue) -> str:
    """The plain text of a value: the id for item refs, the string otherwise."""
    if isinstance(value, ItemRef):
        return str(value.id)
    if isinstance(value, MathVal):
        return value.texvc
    return value.value


class Qualifier(BaseModel):
    model_config = ConfigDict(frozen=True)

    property: EntityId
    value: StatementValue


class Statement(BaseModel):
    model_config = ConfigDict(frozen=True)

    property: EntityId
    value: StatementValue
    qualifiers: tuple[Qualifier, ...] = ()

    @model_validator(mode="after")
    def _property_ids(self) -> Statement:
        for pid in (self.property, *(q.property for q in self.qualifiers)):
            if pid.kind != "property":
                raise ValueError(f"{pid} is not a property id")
        return self

    def same_claim(self, other: Statement) -> bool:
        """Same property and value; qualifiers are not compared."""
        return self.property == other.property and self.value == other.value


class StatementHandle(BaseModel):
    model_config = ConfigDict(frozen=True)

    subject: EntityId
    index: int = Field(ge=0)


# ==========================================
# Entities and mappings
# ==========================================


class Entity(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: EntityId
    kind: EntityKind
    labels: dict[str, str] = Field(default_factory=dict)
    descriptions: dict[str, str] = Field(default_factory=dict)
    aliases: dict[str, list[str]] = Field(default_factory=dict)
    statements: tuple[Statement, ...] = ()
    datatype: Datatype | None = None

    @model_validator(mode="after")
    def _kind_rules(self) -> Entity:
        if self.id.kind != self.kind:
            raise ValueError(f"{self.id} cannot be a {self.kind}")
        if self.kind == "property" and self.datatype is None:
            raise ValueError(f"Property {self.id} needs a datatype")
        if self.kind == "item" and self.datatype is not None:
            raise ValueError(f"Item {self.id} cannot have a datatype")
        return self

    def label(self, language: str = DEFAULT_LANGUAGE) -> str | None:
        return self.labels.get(language)

    def names(self, language: str = DEFAULT_LANGUAGE) -> list[str]:
        """The label followed by the aliases in ``language``."""
        names = [self.labels[language]] if language in self.labels else []
        return names + list(self.aliases.get(language, []))

    def statements_for(self, property_id: EntityId) -> list[Statement]:
        return [st for st in self.statements if st.property == property_id]

    def term_count(self) -> int:
        return (
            len(self.labels)
            + len(self.descriptions)
            + sum(len(values) for values in self.aliases.values())
        )


class IdMapping(BaseModel):
    """One local-to-upstream row; ``stub`` means only terms were imported."""

    model_config = ConfigDict(frozen=True)

    local: EntityId
    source: str = Field(min_length=1)
    upstream: str = Field(min_length=1)
    completeness: Completeness
