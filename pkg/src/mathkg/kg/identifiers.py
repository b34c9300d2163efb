import logging
import re
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Literal

import pandera.pandas as pa
from pydantic import BaseModel, ConfigDict

from mathkg.core.exceptions import ExternalIdError, RegistryError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.core.tables import read_tsv_table

logger = logging.getLogger(__name__)

ID_TYPE_COLUMNS = ["name", "kind", "pattern", "url_template"]

ID_TYPE_SCHEMA = pa.DataFrameSchema(
    {
        "name": pa.Column(str, pa.Check.str_length(min_value=1), unique=True),
        "kind": pa.Column(str, pa.Check.isin(["extrinsic", "intrinsic-name"])),
        "pattern": pa.Column(str, pa.Check.str_length(min_value=1)),
        "url_template": pa.Column(str, pa.Check.str_contains(r"\$1")),
    },
    strict=True,
)


@lru_cache(maxsize=None)
def _compile(pattern: str) -> re.Pattern[str]:
    return re.compile(pattern)


class ExternalIdType(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    kind: Literal["extrinsic", "intrinsic-name"]
    value_pattern: str
    url_template: str

    def matches(self, value: str) -> bool:
        return _compile(self.value_pattern).fullmatch(value) is not None

    def url_for(self, value: str) -> str:
        return self.url_template.replace("$1", value)


class ExternalIdRegistry:
    """Registered identifier types, keyed by name."""

    def __init__(self, types: list[ExternalIdType]):
        self._types = {t.name: t for t in types}
        if len(self._types) != len(types):
            raise RegistryError("Duplicate identifier type names")
        for id_type in types:
            try:
                id_type.matches("")
            except re.error as e:
                raise RegistryError(f"Bad pattern for {id_type.name!r}: {e}") from e

    def __contains__(self, name: object) -> bool:
        return name in self._types

    def __iter__(self) -> Iterator[ExternalIdType]:
        return iter(self._types.values())

    def __len__(self) -> int:
        return len(self._types)

    def get(self, name: str) -> ExternalIdType:
        try:
            return self._types[name]
        except KeyError:
            raise ExternalIdError(f"Unregistered identifier type {name!r}") from None

    def check(self, name: str, value: str) -> None:
        """
        Raises:
            ExternalIdError: If ``name`` is unregistered or ``value`` fails its pattern.
        """
        id_type = self.get(name)
        if not id_type.matches(value):
            raise ExternalIdError(f"{value!r} is not a valid {name}")

    def url_for(self, name: str, value: str) -> str | None:
        id_type = self._types.get(name)
        return id_type.url_for(value) if id_type is not None else None

    @classmethod
    def from_file(cls, path: str | Path) -> "ExternalIdRegistry":
        df = read_tsv_table(path, ID_TYPE_COLUMNS, ID_TYPE_SCHEMA)
        types = [
            ExternalIdType(
                name=row["name"],
                kind=row["kind"],
                value_pattern=row["pattern"],
                url_template=row["url_template"],
            )
            for _, row in df.iterrows()
        ]
        logger.info(f"External identifier registry ready: {len(types)} types")
        return cls(types)


@lru_cache(maxsize=1)
def default_id_registry() -> ExternalIdRegistry:
    return ExternalIdRegistry.from_file(PP.EXTERNAL_ID_REGISTRY)
