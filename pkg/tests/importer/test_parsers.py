import json

import pytest

from mathkg.core.exceptions import RecordParseError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.importer import (
    BibliographicJsonParser,
    CranDescriptionParser,
    DlmfFormulaParser,
    ParserFactory,
    UpstreamItemRef,
    WikidataJsonParser,
)
from mathkg.importer.parsers import Concept, load_concepts
from mathkg.kg import CoreProperties, TimeVal

# ==============================================================================
# FIXTURES
# ==============================================================================

SEED = PP.SEED_FIXTURES_DIR


@pytest.fixture
def cran_records():
    return CranDescriptionParser().parse((SEED / "cran_packages.dcf").read_bytes())


@pytest.fixture
def dlmf_records():
    return DlmfFormulaParser().parse((SEED / "dlmf_formulas.dlmf.tsv").read_bytes())


@pytest.fixture
def biblio_records():
    return BibliographicJsonParser().parse((SEED / "publications.biblio.json").read_bytes())


def values(record, label):
    return [st.value for st in record.statements if st.property == label]


# ==============================================================================
# UNIT TESTS: CRAN
# ==============================================================================


def test_cran_packages(cran_records):
    assert [(c, r.upstream_id) for c, r in cran_records] == [
        ("package", "ggplot2"),
        ("package", "scales"),
        ("package", "deSolve"),
    ]


def test_cran_fields(cran_records):
    ggplot2 = cran_records[0].record

    assert ggplot2.descriptions["en"].startswith("Create Elegant Data")
    assert values(ggplot2, CoreProperties.VERSION)[0].value == "3.5.1"
    assert values(ggplot2, CoreProperties.OFFICIAL_WEBSITE)[0].value == "https://ggplot2.tidyverse.org"
    assert [v.upstream for v in values(ggplot2, CoreProperties.DEPENDS_ON)] == ["scales", "grid"]


def test_cran_continuation_lines(cran_records):
    desolve = cran_records[2].record

    assert desolve.descriptions["en"] == (
        "Solvers for Initial Value Problems of Differential Equations ('ODE', 'DAE', 'DDE')"
    )


def test_cran_corrupt_stanza_is_skipped():
    raw = b"Package: good\nVersion: 1.0\n\nthis is not a field\n\nPackage: other\n"

    records, errors = CranDescriptionParser().parse_with_errors(raw)

    assert [r.upstream_id for _, r in records] == ["good", "other"]
    assert len(errors) == 1
    assert errors[0].record_ref == "stanza 2"


def test_cran_invalid_package_name():
    records, errors = CranDescriptionParser().parse_with_errors(b"Package: 2bad\n")

    assert records == []
    assert "not a valid CRAN Project" in str(errors[0])


def test_cran_missing_package_field():
    _, errors = CranDescriptionParser().parse_with_errors(b"Version: 1.0\n")

    assert "no Package field" in str(errors[0])


# ==============================================================================
# UNIT TESTS: DLMF
# ==============================================================================


def test_dlmf_concepts_precede_formulas(dlmf_records):
    categories = [c for c, _ in dlmf_records]

    assert categories == ["concept"] * 4 + ["formula"] * 6
    assert [r.upstream_id for _, r in dlmf_records[:4]] == ["1.9.E1", "3.12.E1", "4.2.E11", "5.2.E1"]


def test_dlmf_concept_record(dlmf_records):
    concept = dlmf_records[0].record

    assert concept.labels == {"en": "imaginary unit"}
    assert concept.aliases == {"en": ["imaginary-unit"]}
    assert values(concept, CoreProperties.DESCRIBED_AT)[0].value == "https://dlmf.nist.gov/1.9#E1"


def test_dlmf_uses_from_macros_and_column(dlmf_records):
    by_id = {r.upstream_id: r for _, r in dlmf_records}

    assert [v.upstream for v in values(by_id["7.2.E3"], CoreProperties.USES)] == ["4.2.E11", "1.9.E1"]
    assert [v.upstream for v in values(by_id["5.4.E6"], CoreProperties.USES)] == ["5.2.E1", "3.12.E1"]
    assert values(by_id["5.12.E1"], CoreProperties.USES) == [UpstreamItemRef(source="dlmf", upstream="5.4.E6")]
    assert by_id["5.5.E1"].labels == {"en": "DLMF formula 5.5.E1"}


def test_dlmf_bad_rows_are_reported():
    raw = (
        "1.1.E1\tx^2\t\n"
        "1.1.E2\t\\frac{a}\t\n"
        "1.1.E3\tx\tno-such-concept\n"
        "1.1.E4\t\t\n"
        "1.1.E5\ty\t\textra\n"
    ).encode("utf-8")

    records, errors = DlmfFormulaParser().parse_with_errors(raw)

    assert [r.upstream_id for _, r in records] == ["1.1.E1"]
    messages = [str(e) for e in errors]
    assert any("Invalid formula" in m for m in messages)
    assert any("Unknown concept 'no-such-concept'" in m for m in messages)
    assert any("Missing formula" in m for m in messages)
    assert any("Expected 3 columns, got 4" in m for m in messages)


def test_concept_url():
    assert Concept(key="pi", label="pi", dlmf_id="3.12.E1").url == "https://dlmf.nist.gov/3.12#E1"
    assert Concept(key="x", label="x", dlmf_id="5.2").url == "https://dlmf.nist.gov/5.2"


def test_concept_catalogue():
    concepts = load_concepts()

    assert concepts["gamma-function"].dlmf_id == "5.2.E1"
    assert len(concepts) == 6


# ==============================================================================
# UNIT TESTS: bibliographic JSON
# ==============================================================================


def test_biblio_records(biblio_records):
    assert [(c, r.labels["en"]) for c, r in biblio_records] == [
        ("publication", "Numerical evaluation of the incomplete gamma function"),
        ("author", "Josiah Carberry"),
        ("author", "Mira Hollis"),
        ("publication", "Semantic annotation of special function identities"),
        ("author", "Tomas Reyes"),
    ]


def test_biblio_publication_fields(biblio_records):
    publication = biblio_records[0].record

    assert publication.upstream_id == "10.5555/mathkg.0001"
    assert [i.id_type for i in publication.identifiers] == ["DOI", "arXiv ID", "zbMATH document ID"]
    assert values(publication, CoreProperties.PUBLICATION_DATE) == [TimeVal(value="2019-03-01")]
    assert [v.value for v in values(publication, CoreProperties.MSC_CLASSIFICATION)] == ["33B20", "65D20"]
    assert [v.upstream for v in values(publication, CoreProperties.AUTHOR)] == [
        "0000-0002-1825-0097",
        "0000-0001-5109-3700",
    ]


def test_biblio_authors_without_orcid_become_name_strings(biblio_records):
    second = biblio_records[3].record

    assert [v.value for v in values(second, CoreProperties.AUTHOR_NAME)] == ["Anonymous Contributor"]


@pytest.mark.parametrize(
    "entry, message",
    [
        ({"doi": "10.1000/x"}, "no title"),
        ({"title": "Untitled ids"}, "no DOI"),
        ({"doi": "10.1000/x", "title": "t", "date": "March"}, "Malformed date"),
        ({"doi": "10.1000/x", "title": "t", "msc": ["ABC"]}, "not an MSC code"),
        ({"doi": "not-a-doi", "title": "t"}, "not a valid DOI"),
        ({"doi": "10.1000/abc", "title": 123}, "'title' must be a string"),
        ({"doi": "10.1000/abc", "title": "t", "authors": ["Alice"]}, "is not an object"),
        ({"doi": "10.1000/abc", "title": "t", "authors": "Alice"}, "'authors' must be a list"),
        ({"doi": "10.1000/abc", "title": "t", "authors": [{"name": 7}]}, "'name' must be a string"),
        ({"doi": "10.1000/abc", "title": "t", "journal": ["J"]}, "'journal' must be a string"),
        ({"doi": "10.1000/abc", "title": "t", "msc": [33]}, "not an MSC code"),
    ],
)
def test_biblio_bad_entries(entry, message):
    raw = json.dumps([entry, {"doi": "10.1000/ok", "title": "fine"}]).encode("utf-8")

    records, errors = BibliographicJsonParser().parse_with_errors(raw)

    assert [r.upstream_id for _, r in records] == ["10.1000/ok"]
    assert message in str(errors[0])


def test_biblio_malformed_document():
    records, errors = BibliographicJsonParser().parse_with_errors(b"{\"doi\": 1}")

    assert records == []
    assert "Expected a JSON list" in str(errors[0])


def test_non_utf8_input():
    records, errors = BibliographicJsonParser().parse_with_errors(b"\xff\xfe[]")

    assert records == []
    assert "not UTF-8" in str(errors[0])


# ==============================================================================
# UNIT TESTS: Wikidata dumps and factory
# ==============================================================================


def test_wikidata_dump(tmp_path):
    document = {
        "entities": {
            "Q5": {"id": "Q5", "labels": {"en": {"language": "en", "value": "human"}}},
            "Q395": {"id": "Q395", "labels": {"en": {"language": "en", "value": "mathematics"}}},
        }
    }

    records = WikidataJsonParser().parse(json.dumps(document).encode("utf-8"))

    assert [r.upstream_id for _, r in records] == ["Q395", "Q5"]
    assert {c for c, _ in records} == {"concept"}



def test_wikidata_property_entities():
    document = {
        "entities": {
            "P2534": {
                "id": "P2534",
                "type": "property",
                "datatype": "math",
                "labels": {"en": {"language": "en", "value": "calculation formula"}},
            },
            "P625": {"id": "P625", "type": "property", "datatype": "globe-coordinate"},
        }
    }

    records, errors = WikidataJsonParser().parse_with_errors(json.dumps(document).encode("utf-8"))

    assert [(r.upstream_id, r.kind, r.datatype) for _, r in records] == [("P2534", "property", "math")]
    assert errors[0].record_ref == "P625"
    assert "Unsupported property datatype 'globe-coordinate'" in str(errors[0])


@pytest.mark.parametrize(
    "name, parser_cls",
    [
        ("cran_packages.dcf", CranDescriptionParser),
        ("formulas.dlmf.tsv", DlmfFormulaParser),
        ("papers.biblio.json", BibliographicJsonParser),
        ("dump.wikidata.json", WikidataJsonParser),
    ],
)
def test_factory_picks_parser_by_suffix(name, parser_cls):
    assert ParserFactory.supports(name)
    assert isinstance(ParserFactory.for_path(name), parser_cls)


def test_factory_rejects_unknown_suffix():
    assert not ParserFactory.supports("notes.txt")
    with pytest.raises(RecordParseError, match="Unsupported input file: notes.txt"):
        ParserFactory.for_path("notes.txt")
