"""
Per-datasource record parsers.

Every parser turns the raw bytes of one input file into categorized
UpstreamRecords. A bad record never stops the file: its error is collected
and parsing moves on to the next record.
"""

import csv
import io
import json
import logging
import re
from abc import ABC, abstractmethod
from functools import lru_cache
from pathlib import Path
from typing import Any, Iterator, NamedTuple

import pandas as pd
import pandera.pandas as pa
from pydantic import BaseModel, ConfigDict, ValidationError

from mathkg.core.exceptions import RecordParseError, TexvcSyntaxError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.core.tables import read_tsv_table
from mathkg.importer.records import Category, UpstreamItemRef, UpstreamRecord, UpstreamStatement
from mathkg.importer.wikidata import EntityData, PropertyMap, to_upstream_record
from mathkg.kg.identifiers import ExternalIdRegistry, default_id_registry
from mathkg.kg.models import ExternalIdVal, MathVal, StringVal, TimeVal, UrlVal
from mathkg.kg.schema import CoreProperties as CP
from mathkg.mathml.macros import MacroTable, default_macro_table, expand_semantics, extract_concepts

logger = logging.getLogger(__name__)


class ParsedRecord(NamedTuple):
    category: Category
    record: UpstreamRecord


class RecordParser(ABC):
    """
    Abstract base class for datasource parsers.

    Subclasses split the decoded input into record chunks and turn each chunk
    into one or more records; parse_with_errors drives both steps.
    """

    source: str
    suffix: str

    def __init__(
        self,
        id_registry: ExternalIdRegistry | None = None,
        macro_table: MacroTable | None = None,
    ):
        self.id_registry = id_registry or default_id_registry()
        self.macro_table = macro_table or default_macro_table()

    @abstractmethod
    def _split(self, text: str, errors: list[RecordParseError]) -> Iterator[tuple[str, Any]]:
        """Yields ``(record_ref, chunk)`` pairs; unreadable chunks go to ``errors``."""

    @abstractmethod
    def _parse_record(self, ref: str, chunk: Any) -> list[ParsedRecord]:
        """Turns one chunk into records. Raises RecordParseError."""

    def _complete(self, records: list[ParsedRecord]) -> list[ParsedRecord]:
        return records

    def _identifier(self, id_type: str, value: str, ref: str) -> UpstreamStatement:
        if id_type in self.id_registry and not self.id_registry.get(id_type).matches(value):
            raise RecordParseError(f"{value!r} is not a valid {id_type}", ref)
        return UpstreamStatement(
            property=id_type, datatype="external-id", value=ExternalIdVal(id_type=id_type, value=value)
        )

    def parse_with_errors(self, raw: bytes) -> tuple[list[ParsedRecord], list[RecordParseError]]:
        try:
            text = raw.decode("utf-8")
        except UnicodeDecodeError as e:
            return [], [RecordParseError(f"Input is not UTF-8: {e}")]

        records: list[ParsedRecord] = []
        errors: list[RecordParseError] = []
        for ref, chunk in self._split(text, errors):
            try:
                parsed = self._parse_record(ref, chunk)
                for item in parsed:
                    if not item.record.identifiers:
                        raise RecordParseError("Record carries no external identifier", ref)
            except RecordParseError as e:
                e.record_ref = e.record_ref or ref
                logger.error(f"Error parsing {self.source} record {ref}: {e}")
                errors.append(e)
                continue
            except (ValidationError, ValueError, KeyError, TypeError, AttributeError) as e:
                logger.error(f"Error parsing {self.source} record {ref}: {e}")
                errors.append(RecordParseError(str(e), ref))
                continue
            records.extend(parsed)
        return self._complete(records), errors

    def parse(self, raw: bytes) -> list[ParsedRecord]:
        return self.parse_with_errors(raw)[0]


# ==========================================
# CRAN DESCRIPTION / PACKAGES files
# ==========================================

_DCF_FIELD = re.compile(r"^([A-Za-z][A-Za-z0-9@/._-]*):\s*(.*)$")
_DEPENDENCY = re.compile(r"^\s*([A-Za-z][A-Za-z0-9.]*)\s*(?:\(.*\))?\s*$")


class CranDescriptionParser(RecordParser):
    """Debian-control-style stanzas, one package per blank-line separated block."""

    source = "cran"
    suffix = ".dcf"

    def _split(self, text, errors):
        for number, block in enumerate(re.split(r"\n\s*\n", text.strip()), start=1):
            if not block.strip():
                continue
            fields: dict[str, str] = {}
            key = None
            try:
                for line in block.splitlines():
                    if line[:1].isspace() and key is not None:
                        fields[key] += " " + line.strip()
                        continue
                    match = _DCF_FIELD.match(line)
                    if match is None:
                        raise RecordParseError(f"Malformed line {line!r}", f"stanza {number}")
                    key = match.group(1)
                    fields[key] = match.group(2).strip()
            except RecordParseError as e:
                logger.error(f"Error parsing cran record stanza {number}: {e}")
                errors.append(e)
                continue
            yield fields.get("Package", f"stanza {number}"), fields

    def _parse_record(self, ref, fields):
        package = fields.get("Package")
        if not package:
            raise RecordParseError("Stanza has no Package field", ref)
        statements = [self._identifier("CRAN Project", package, ref)]
        if fields.get("Version"):
            statements.append(
                UpstreamStatement(property=CP.VERSION, datatype="string", value=StringVal(value=fields["Version"]))
            )
        if fields.get("License"):
            statements.append(
                UpstreamStatement(property=CP.LICENSE, datatype="string", value=StringVal(value=fields["License"]))
            )
        urls = [u for u in re.split(r"[,\s]+", fields.get("URL", "")) if u]
        if urls:
            statements.append(
                UpstreamStatement(property=CP.OFFICIAL_WEBSITE, datatype="url", value=UrlVal(value=urls[0]))
            )
        for dependency in self._dependencies(fields, ref):
            statements.append(
                UpstreamStatement(
                    property=CP.DEPENDS_ON,
                    datatype="item",
                    value=UpstreamItemRef(source=self.source, upstream=dependency),
                )
            )
        record = UpstreamRecord(
            source=self.source,
            upstream_id=package,
            labels={"en": package},
            descriptions={"en": fields["Title"]} if fields.get("Title") else {},
            statements=tuple(statements),
        )
        return [ParsedRecord("package", record)]

    @staticmethod
    def _dependencies(fields: dict[str, str], ref: str) -> list[str]:
        names = []
        for key in ("Depends", "Imports", "LinkingTo"):
            for entry in filter(None, (e.strip() for e in fields.get(key, "").split(","))):
                match = _DEPENDENCY.match(entry)
                if match is None:
                    raise RecordParseError(f"Malformed dependency {entry!r}", ref)
                if match.group(1) != "R" and match.group(1) not in names:
                    names.append(match.group(1))
        return names


# ==========================================
# DLMF formula tables
# ==========================================

DLMF_SOURCE = "dlmf"
DLMF_COLUMNS = ["dlmf_id", "texvc", "uses_concepts"]

CONCEPT_COLUMNS = ["concept_key", "label", "dlmf_id", "description"]

CONCEPT_SCHEMA = pa.DataFrameSchema(
    {
        "concept_key": pa.Column(str, pa.Check.str_matches(r"^[a-z][a-z0-9-]*$"), unique=True),
        "label": pa.Column(str, pa.Check.str_length(min_value=1), unique=True),
        "dlmf_id": pa.Column(str, pa.Check.str_length(min_value=1), unique=True),
        "description": pa.Column(str),
    },
    strict=True,
)


class Concept(BaseModel):
    model_config = ConfigDict(frozen=True)

    key: str
    label: str
    dlmf_id: str
    description: str = ""

    @property
    def url(self) -> str:
        """``1.9.E1`` -> ``https://dlmf.nist.gov/1.9#E1``."""
        section, _, anchor = self.dlmf_id.rpartition(".")
        if anchor.startswith("E") and section:
            return f"https://dlmf.nist.gov/{section}#{anchor}"
        return f"https://dlmf.nist.gov/{self.dlmf_id}"


def load_concepts(path: str | Path = PP.CONCEPT_CATALOGUE) -> dict[str, Concept]:
    df = read_tsv_table(path, CONCEPT_COLUMNS, CONCEPT_SCHEMA)
    return {
        row["concept_key"]: Concept(
            key=row["concept_key"],
            label=row["label"],
            dlmf_id=row["dlmf_id"],
            description=row["description"],
        )
        for _, row in df.iterrows()
    }


@lru_cache(maxsize=1)
def default_concepts() -> dict[str, Concept]:
    return load_concepts()


class DlmfFormulaParser(RecordParser):
    """
    ``dlmf_id<TAB>texvc<TAB>uses_concepts`` rows.

    ``uses_concepts`` lists concept keys from the catalogue or other DLMF
    formula ids. Concepts named by semantic macros in the formula count as
    used too. Every referenced concept is emitted as a record of its own.
    """

    source = DLMF_SOURCE
    suffix = ".dlmf.tsv"

    def __init__(
        self,
        id_registry: ExternalIdRegistry | None = None,
        concepts: dict[str, Concept] | None = None,
        macro_table: MacroTable | None = None,
    ):
        super().__init__(id_registry, macro_table)
        self.concepts = concepts if concepts is not None else default_concepts()

    def _split(self, text, errors):
        lines = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
        if not lines:
            return

        def bad_line(fields: list[str]) -> None:
            ref = fields[0] if fields else "?"
            error = RecordParseError(f"Expected {len(DLMF_COLUMNS)} columns, got {len(fields)}", ref)
            logger.error(f"Error parsing dlmf record {ref}: {error}")
            errors.append(error)
            return None

        df = pd.read_csv(
            io.StringIO("\n".join(lines)),
            sep="\t",
            header=None,
            names=DLMF_COLUMNS,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            engine="python",
            on_bad_lines=bad_line,
        ).fillna("")
        for _, row in df.iterrows():
            yield row["dlmf_id"] or "?", row.to_dict()

    def _reference(self, entry: str, ref: str) -> UpstreamItemRef:
        if entry in self.concepts:
            return UpstreamItemRef(source=self.source, upstream=self.concepts[entry].dlmf_id)
        if self.id_registry.get("DLMF ID").matches(entry):
            return UpstreamItemRef(source=self.source, upstream=entry)
        raise RecordParseError(f"Unknown concept {entry!r}", ref)

    def _parse_record(self, ref, row):
        dlmf_id, texvc = row["dlmf_id"].strip(), row["texvc"].strip()
        if not texvc:
            raise RecordParseError("Missing formula", ref)
        identity = self._identifier("DLMF ID", dlmf_id, ref)
        try:
            tree = expand_semantics(texvc, self.macro_table)
        except TexvcSyntaxError as e:
            raise RecordParseError(f"Invalid formula {texvc!r}: {e}", ref) from e

        entries = [e.strip() for e in row["uses_concepts"].split(",") if e.strip()]
        for concept_key in sorted(extract_concepts(tree)):
            if concept_key not in entries:
                entries.append(concept_key)

        statements = [
            identity,
            UpstreamStatement(property=CP.DEFINING_FORMULA, datatype="math", value=MathVal(texvc=texvc)),
        ]
        seen = set()
        for entry in entries:
            target = self._reference(entry, ref)
            if target.upstream in seen:
                continue
            seen.add(target.upstream)
            statements.append(UpstreamStatement(property=CP.USES, datatype="item", value=target))

        record = UpstreamRecord(
            source=self.source,
            upstream_id=dlmf_id,
            labels={"en": f"DLMF formula {dlmf_id}"},
            descriptions={"en": f"Formula {dlmf_id} of the NIST Digital Library of Mathematical Functions"},
            statements=tuple(statements),
        )
        return [ParsedRecord("formula", record)]

    def _concept_record(self, concept: Concept) -> ParsedRecord:
        record = UpstreamRecord(
            source=self.source,
            upstream_id=concept.dlmf_id,
            labels={"en": concept.label},
            descriptions={"en": concept.description} if concept.description else {},
            aliases={"en": [concept.key]},
            statements=(
                self._identifier("DLMF ID", concept.dlmf_id, concept.key),
                UpstreamStatement(property=CP.DESCRIBED_AT, datatype="url", value=UrlVal(value=concept.url)),
            ),
        )
        return ParsedRecord("concept", record)

    def _complete(self, records):
        formulas = {parsed.record.upstream_id for parsed in records}
        by_dlmf_id = {c.dlmf_id: c for c in self.concepts.values()}
        used = sorted(
            {
                ref.upstream
                for parsed in records
                for ref in parsed.record.references()
                if ref.upstream in by_dlmf_id and ref.upstream not in formulas
            }
        )
        return [self._concept_record(by_dlmf_id[dlmf_id]) for dlmf_id in used] + records


# ==========================================
# Bibliographic JSON (zbMATH, arXiv, Crossref, Zenodo exports)
# ==========================================

_BIBLIO_IDS = [("doi", "DOI"), ("arxiv", "arXiv ID"), ("zbmath", "zbMATH document ID"), ("zenodo", "Zenodo ID")]
_DATE = re.compile(r"^[0-9]{4}(?:-[0-9]{2}(?:-[0-9]{2})?)?$")


class BibliographicJsonParser(RecordParser):
    """
    A JSON list of publications with ``doi``, ``arxiv``, ``zbmath``, ``zenodo``,
    ``title``, ``authors`` (``name`` and optional ``orcid``), ``date``,
    ``journal`` and ``msc``. Authors with an ORCID iD become records of their own.
    """

    source = "biblio"
    suffix = ".biblio.json"
    author_source = "orcid"

    def _split(self, text, errors):
        try:
            entries = json.loads(text)
        except json.JSONDecodeError as e:
            errors.append(RecordParseError(f"Malformed JSON: {e}"))
            return
        if not isinstance(entries, list):
            errors.append(RecordParseError("Expected a JSON list of publications"))
            return
        for number, entry in enumerate(entries, start=1):
            ref = f"entry {number}"
            if isinstance(entry, dict):
                ref = str(entry.get("doi") or entry.get("arxiv") or ref)
            yield ref, entry

    @staticmethod
    def _text(entry: dict, key: str, ref: str) -> str:
        value = entry.get(key)
        if value is None:
            return ""
        if not isinstance(value, str):
            raise RecordParseError(f"Field {key!r} must be a string, got {type(value).__name__}", ref)
        return value.strip()

    @staticmethod
    def _list(entry: dict, key: str, ref: str) -> list:
        value = entry.get(key) or []
        if not isinstance(value, list):
            raise RecordParseError(f"Field {key!r} must be a list, got {type(value).__name__}", ref)
        return value

    @staticmethod
    def _date(value: str, ref: str) -> TimeVal:
        if not _DATE.match(value):
            raise RecordParseError(f"Malformed date {value!r}", ref)
        parts = (value.split("-") + ["01", "01"])[:3]
        return TimeVal(value="-".join(parts))

    def _parse_record(self, ref, entry):
        if not isinstance(entry, dict):
            raise RecordParseError("Publication entry is not an object", ref)
        title = self._text(entry, "title", ref)
        if not title:
            raise RecordParseError("Publication has no title", ref)

        statements = [
            self._identifier(id_type, str(entry[key]), ref)
            for key, id_type in _BIBLIO_IDS
            if entry.get(key)
        ]
        if not statements:
            raise RecordParseError("Publication has no DOI, arXiv, zbMATH or Zenodo id", ref)
        statements.append(UpstreamStatement(property=CP.TITLE, datatype="string", value=StringVal(value=title)))

        authors = []
        for author in self._list(entry, "authors", ref):
            if not isinstance(author, dict):
                raise RecordParseError(f"Author {author!r} is not an object", ref)
            name = self._text(author, "name", ref)
            orcid = self._text(author, "orcid", ref)
            if orcid:
                identity = self._identifier("ORCID iD", orcid, ref)
                authors.append(
                    ParsedRecord(
                        "author",
                        UpstreamRecord(
                            source=self.author_source,
                            upstream_id=orcid,
                            labels={"en": name or orcid},
                            statements=(identity,),
                        ),
                    )
                )
                statements.append(
                    UpstreamStatement(
                        property=CP.AUTHOR,
                        datatype="item",
                        value=UpstreamItemRef(source=self.author_source, upstream=orcid),
                    )
                )
            elif name:
                statements.append(
                    UpstreamStatement(property=CP.AUTHOR_NAME, datatype="string", value=StringVal(value=name))
                )
        if entry.get("date"):
            statements.append(
                UpstreamStatement(
                    property=CP.PUBLICATION_DATE, datatype="time", value=self._date(str(entry["date"]), ref)
                )
            )
        journal = self._text(entry, "journal", ref)
        if journal:
            statements.append(
                UpstreamStatement(property=CP.PUBLISHED_IN, datatype="string", value=StringVal(value=journal))
            )
        for code in self._list(entry, "msc", ref):
            if not isinstance(code, str) or not self.id_registry.get("MSC ID").matches(code):
                raise RecordParseError(f"{code!r} is not an MSC code", ref)
            statements.append(
                UpstreamStatement(property=CP.MSC_CLASSIFICATION, datatype="string", value=StringVal(value=code))
            )

        primary = statements[0].value
        publication = UpstreamRecord(
            source=self.source,
            upstream_id=primary.value,  # type: ignore[union-attr]
            labels={"en": title},
            statements=tuple(statements),
        )
        return [ParsedRecord("publication", publication), *authors]

    def _complete(self, records):
        # An author shared by several publications is emitted once.
        seen: set[tuple[str, str]] = set()
        unique = []
        for parsed in records:
            key = (parsed.record.source, parsed.record.upstream_id)
            if key in seen:
                continue
            seen.add(key)
            unique.append(parsed)
        return unique


# ==========================================
# Wikidata entity dumps
# ==========================================


class WikidataJsonParser(RecordParser):
    source = "wikidata"
    suffix = ".wikidata.json"

    def __init__(
        self,
        id_registry: ExternalIdRegistry | None = None,
        macro_table: MacroTable | None = None,
        property_map: PropertyMap | None = None,
    ):
        super().__init__(id_registry, macro_table)
        self.property_map = property_map

    def _split(self, text, errors):
        try:
            document = EntityData.model_validate_json(text)
        except ValidationError as e:
            errors.append(RecordParseError(f"Malformed EntityData document: {e}"))
            return
        for upstream_id in sorted(document.entities):
            yield upstream_id, document.entities[upstream_id]

    def _parse_record(self, ref, entity):
        return [ParsedRecord("concept", to_upstream_record(entity, self.property_map))]


# ==========================================
# Factory
# ==========================================


class ParserFactory:
    "Factory class to pick the record parser for an input file"

    PARSERS: list[type[RecordParser]] = [
        WikidataJsonParser,
        BibliographicJsonParser,
        DlmfFormulaParser,
        CranDescriptionParser,
    ]

    @staticmethod
    def supports(path: str | Path) -> bool:
        return any(Path(path).name.endswith(p.suffix) for p in ParserFactory.PARSERS)

    @staticmethod
    def for_path(path: str | Path, **kwargs) -> RecordParser:
        """
        Creates the parser registered for the file's suffix.

        Raises:
            RecordParseError: If no parser handles the suffix.
        """
        name = Path(path).name
        for parser_cls in ParserFactory.PARSERS:
            if name.endswith(parser_cls.suffix):
                return parser_cls(**kwargs)
        raise RecordParseError(
            f"Unsupported input file: {name}. "
            f"Supported suffixes: {[p.suffix for p in ParserFactory.PARSERS]}"
        )
