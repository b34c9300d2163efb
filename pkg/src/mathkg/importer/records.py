"""Records as they come out of a source, before ids are rewritten to local ones."""

from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from mathkg.kg.models import (
    Datatype,
    EntityKind,
    ExternalIdVal,
    MathVal,
    StringVal,
    TimeVal,
    UrlVal,
)

Category = Literal[
    "publication",
    "author",
    "journal",
    "software",
    "dataset",
    "formula",
    "package",
    "collection",
    "concept",
]


class UpstreamItemRef(BaseModel):
    """A reference to another record, named by its id in ``source``."""

    model_config = ConfigDict(frozen=True)

    type: Literal["item"] = "item"
    source: str
    upstream: str = Field(min_length=1)


UpstreamValue = Annotated[
    Union[UpstreamItemRef, StringVal, ExternalIdVal, MathVal, UrlVal, TimeVal],
    Field(discriminator="type"),
]


class UpstreamStatement(BaseModel):
    """``property`` is the English label of the local property."""

    model_config = ConfigDict(frozen=True)

    property: str
    datatype: Datatype
    value: UpstreamValue
    qualifiers: tuple[tuple[str, Datatype, UpstreamValue], ...] = ()

    @model_validator(mode="after")
    def _datatype_fits(self) -> "UpstreamStatement":
        if self.value.type != self.datatype:
            raise ValueError(
                f"{self.property!r} expects {self.datatype}, got {self.value.type}"
            )
        return self


class UpstreamRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    source: str
    upstream_id: str = Field(min_length=1)
    kind: EntityKind = "item"
    labels: dict[str, str] = Field(default_factory=dict)
    descriptions: dict[str, str] = Field(default_factory=dict)
    aliases: dict[str, list[str]] = Field(default_factory=dict)
    statements: tuple[UpstreamStatement, ...] = ()
    datatype: Datatype | None = None

    @property
    def identifiers(self) -> list[ExternalIdVal]:
        """External-id values in statement order; the first one is the dedup key."""
        return [st.value for st in self.statements if isinstance(st.value, ExternalIdVal)]

    def references(self) -> list[UpstreamItemRef]:
        """Item references in statement and qualifier values, in order."""
        refs = []
        for st in self.statements:
            values = [st.value, *(value for _, _, value in st.qualifiers)]
            refs.extend(v for v in values if isinstance(v, UpstreamItemRef))
        return refs

    def terms_only(self) -> "UpstreamRecord":
        return self.model_copy(update={"statements": ()})
