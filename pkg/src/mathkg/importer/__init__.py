from mathkg.importer.connectors import FixtureConnector, SourceConnector
from mathkg.importer.parsers import (
    BibliographicJsonParser,
    CranDescriptionParser,
    DlmfFormulaParser,
    ParsedRecord,
    ParserFactory,
    RecordParser,
    WikidataJsonParser,
)
from mathkg.importer.pipeline import ImportReport, import_entity, run_datasource, seed
from mathkg.importer.records import UpstreamItemRef, UpstreamRecord, UpstreamStatement

__all__ = [
    "BibliographicJsonParser",
    "CranDescriptionParser",
    "DlmfFormulaParser",
    "FixtureConnector",
    "ImportReport",
    "ParsedRecord",
    "ParserFactory",
    "RecordParser",
    "SourceConnector",
    "UpstreamItemRef",
    "UpstreamRecord",
    "UpstreamStatement",
    "WikidataJsonParser",
    "import_entity",
    "run_datasource",
    "seed",
]
