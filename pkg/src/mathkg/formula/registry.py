import logging
from functools import lru_cache
from pathlib import Path
from typing import Iterator, Literal

import pandera.pandas as pa
from pydantic import BaseModel, ConfigDict

from mathkg.core.exceptions import RegistryError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.core.tables import read_tsv_table

logger = logging.getLogger(__name__)

OutputClass = Literal["identifier", "operator", "layout", "accent", "text", "space"]
OUTPUT_CLASSES = ["identifier", "operator", "layout", "accent", "text", "space"]

REGISTRY_COLUMNS = ["name", "arity", "class", "unicode_hex"]
ALIAS_COLUMNS = ["alias", "replacement"]

# Commands whose grammar is not "name followed by arity arguments".
STRUCTURAL_COMMANDS = frozenset({"left", "right", "sqrt", "ce"})

# Operators accepted after \left and \right.
DELIMITER_COMMANDS = frozenset(
    {"langle", "rangle", "lfloor", "rfloor", "lceil", "rceil", "vert", "Vert", "{", "}", "|"}
)

_CONTROL_NAME = r"^(?:[A-Za-z]+|[^A-Za-z\s#$\\])$"

REGISTRY_SCHEMA = pa.DataFrameSchema(
    {
        "name": pa.Column(str, pa.Check.str_matches(_CONTROL_NAME), unique=True),
        "arity": pa.Column(int, pa.Check.in_range(0, 3), coerce=True),
        "class": pa.Column(str, pa.Check.isin(OUTPUT_CLASSES)),
        "unicode_hex": pa.Column(str, pa.Check.str_matches(r"^(?:[0-9A-Fa-f]{1,6})?$")),
    },
    strict=True,
)

ALIAS_SCHEMA = pa.DataFrameSchema(
    {
        "alias": pa.Column(str, pa.Check.str_matches(r"^[A-Za-z]+$"), unique=True),
        "replacement": pa.Column(str, pa.Check.str_matches(_CONTROL_NAME)),
    },
    strict=True,
)


class CommandSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    arity: int
    output_class: OutputClass
    unicode: int | None = None

    @property
    def char(self) -> str | None:
        return chr(self.unicode) if self.unicode is not None else None


class CommandRegistry:
    """
    The supported texvc command set plus its deprecated aliases.

    Instances are immutable after construction and hashed by identity, so a
    registry can key the grammar cache.
    """

    def __init__(self, specs: list[CommandSpec], aliases: dict[str, str] | None = None):
        self._specs = {spec.name: spec for spec in specs}
        if len(self._specs) != len(specs):
            raise RegistryError("Duplicate command names in registry")

        self._aliases: dict[str, str] = {}
        for alias, target in (aliases or {}).items():
            if alias in self._specs:
                raise RegistryError(f"Alias {alias!r} shadows a registry command")
            if target in STRUCTURAL_COMMANDS:
                raise RegistryError(f"Alias {alias!r} cannot target {target!r}")
            if target not in self._specs:
                logger.warning(f"Dropping alias \\{alias}: \\{target} is not registered")
                continue
            self._aliases[alias] = target

    def __contains__(self, name: object) -> bool:
        return name in self._specs

    def __iter__(self) -> Iterator[CommandSpec]:
        return iter(self._specs.values())

    def __len__(self) -> int:
        return len(self._specs)

    def get(self, name: str) -> CommandSpec:
        try:
            return self._specs[name]
        except KeyError:
            raise RegistryError(f"Unknown command: \\{name}") from None

    @property
    def aliases(self) -> dict[str, str]:
        return dict(self._aliases)

    def names(self, *, arity: int | None = None, output_class: str | None = None) -> list[str]:
        return sorted(
            spec.name
            for spec in self._specs.values()
            if (arity is None or spec.arity == arity)
            and (output_class is None or spec.output_class == output_class)
        )

    def listing(self) -> list[tuple[str, int, str]]:
        return sorted((s.name, s.arity, s.output_class) for s in self._specs.values())

    @classmethod
    def from_files(cls, registry_path: str | Path, alias_path: str | Path | None = None) -> "CommandRegistry":
        df = read_tsv_table(registry_path, REGISTRY_COLUMNS, REGISTRY_SCHEMA)
        specs = [
            CommandSpec(
                name=row["name"],
                arity=int(row["arity"]),
                output_class=row["class"],
                unicode=int(row["unicode_hex"], 16) if row["unicode_hex"] else None,
            )
            for _, row in df.iterrows()
        ]
        aliases: dict[str, str] = {}
        if alias_path is not None:
            alias_df = read_tsv_table(alias_path, ALIAS_COLUMNS, ALIAS_SCHEMA)
            aliases = dict(zip(alias_df["alias"], alias_df["replacement"]))
        logger.info(f"Command registry ready: {len(specs)} commands, {len(aliases)} aliases")
        return cls(specs, aliases)


@lru_cache(maxsize=1)
def default_registry() -> CommandRegistry:
    """The bundled registry, loaded once per process."""
    return CommandRegistry.from_files(PP.COMMAND_REGISTRY, PP.ALIAS_TABLE)


def load_registry(path: str | Path | None = None) -> CommandRegistry:
    if path is None:
        return default_registry()
    return CommandRegistry.from_files(path, PP.ALIAS_TABLE)


def supported_commands(registry: CommandRegistry | None = None) -> list[tuple[str, int, str]]:
    """Stable, sorted ``(name, arity, class)`` listing of the registry."""
    return (registry or default_registry()).listing()
