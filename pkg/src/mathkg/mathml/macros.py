import logging
import re
from functools import lru_cache
from pathlib import Path

import pandera.pandas as pa
from pydantic import BaseModel, ConfigDict, Field

from mathkg.core.exceptions import MacroConfigurationError, TexvcSyntaxError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.core.tables import read_tsv_table
from mathkg.formula.diagnostics import Diagnostic
from mathkg.formula.nodes import MathNode, SemanticMacro, iter_subtrees
from mathkg.formula.parser import parse_texvc
from mathkg.formula.registry import CommandRegistry, default_registry

logger = logging.getLogger(__name__)

MACRO_COLUMNS = ["macro", "rendered_texvc", "concept_key", "fallback_url"]

MACRO_SCHEMA = pa.DataFrameSchema(
    {
        "macro": pa.Column(str, pa.Check.str_matches(r"^[A-Za-z]+$"), unique=True),
        "rendered_texvc": pa.Column(str, pa.Check.str_length(min_value=1)),
        "concept_key": pa.Column(str, pa.Check.str_length(min_value=1)),
        "fallback_url": pa.Column(str),
    },
    strict=True,
)


class MacroEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    rendered_texvc: str
    concept_key: str = Field(min_length=1)
    fallback_url: str = ""


class MacroTable:
    """
    Nullary semantic macros such as ``\\iunit``.

    Each macro renders exactly like its ``rendered_texvc`` but carries a
    concept key that the emitter can turn into a link. Immutable after load.
    """

    def __init__(self, entries: list[MacroEntry], registry: CommandRegistry | None = None):
        registry = registry or default_registry()
        self._entries = {entry.name: entry for entry in entries}
        if len(self._entries) != len(entries):
            raise MacroConfigurationError("Duplicate macro names in macro table")

        clashes = sorted(n for n in self._entries if n in registry or n in registry.aliases)
        if clashes:
            raise MacroConfigurationError(
                f"Semantic macros collide with registry commands: {', '.join(clashes)}"
            )

        self._nodes: dict[str, SemanticMacro] = {}
        for entry in entries:
            rendered = parse_texvc(entry.rendered_texvc, registry=registry)
            if isinstance(rendered, Diagnostic):
                raise MacroConfigurationError(
                    f"Macro \\{entry.name} renders invalid texvc "
                    f"{entry.rendered_texvc!r}: {rendered.message}"
                )
            self._nodes[entry.name] = SemanticMacro(
                macro_name=entry.name, rendered=rendered, concept_key=entry.concept_key
            )

    def __contains__(self, name: object) -> bool:
        return name in self._entries

    def __iter__(self):
        return iter(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def entry(self, name: str) -> MacroEntry:
        return self._entries[name]

    @property
    def nodes(self) -> dict[str, SemanticMacro]:
        return dict(self._nodes)

    def fallback_url(self, name: str) -> str | None:
        entry = self._entries.get(name)
        if entry is None or not entry.fallback_url:
            return None
        return entry.fallback_url

    def by_concept(self, concept_key: str) -> MacroEntry | None:
        for entry in self._entries.values():
            if entry.concept_key == concept_key:
                return entry
        return None

    @classmethod
    def from_file(cls, path: str | Path, registry: CommandRegistry | None = None) -> "MacroTable":
        df = read_tsv_table(path, MACRO_COLUMNS, MACRO_SCHEMA)
        entries = [
            MacroEntry(
                name=row["macro"],
                rendered_texvc=row["rendered_texvc"],
                concept_key=row["concept_key"],
                fallback_url=row["fallback_url"],
            )
            for _, row in df.iterrows()
        ]
        logger.info(f"Macro table ready: {len(entries)} semantic macros")
        return cls(entries, registry)


@lru_cache(maxsize=1)
def default_macro_table() -> MacroTable:
    return MacroTable.from_file(PP.MACRO_TABLE)


def load_macro_table(path: str | Path | None = None) -> MacroTable:
    if path is None:
        return default_macro_table()
    return MacroTable.from_file(path)


def expand_semantics(text: str, table: MacroTable | None = None) -> MathNode:
    """
    Parses texvc that may use semantic macros.

    Raises:
        TexvcSyntaxError: If the formula does not parse.
        MacroConfigurationError: If a macro name collides with a registry command.
    """
    table = table or default_macro_table()
    result = parse_texvc(text, macros=table.nodes)
    if isinstance(result, Diagnostic):
        raise TexvcSyntaxError(result)
    return result


def desugar(text: str, table: MacroTable | None = None) -> str:
    """Replaces every semantic macro by its plain rendering in braces."""
    table = table or default_macro_table()
    names = sorted((entry.name for entry in table), key=len, reverse=True)
    if not names:
        return text
    pattern = re.compile(r"\\(%s)(?![A-Za-z])" % "|".join(map(re.escape, names)))
    return pattern.sub(lambda m: "{" + table.entry(m.group(1)).rendered_texvc + "}", text)


def extract_concepts(ast: MathNode) -> set[str]:
    return {n.concept_key for n in iter_subtrees(ast) if isinstance(n, SemanticMacro)}
