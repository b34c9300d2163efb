import json

import pytest

from mathkg.cli import main
from mathkg.core.paths import ProjectPaths as PP
from mathkg.kg import open_store

# ==============================================================================
# FIXTURES
# ==============================================================================


@pytest.fixture
def store_dir(tmp_path):
    return tmp_path / "store"


@pytest.fixture
def seeded_dir(store_dir, capsys):
    """A store directory populated by the ``seed`` command."""
    assert main(["--store", str(store_dir), "seed"]) == 0
    capsys.readouterr()
    return store_dir


def run(store_dir, *argv):
    return main(["--store", str(store_dir), *argv])


def stats(store_dir, capsys) -> dict[str, int]:
    assert run(store_dir, "stats") == 0
    rows = [line.split("\t") for line in capsys.readouterr().out.splitlines() if line]
    return {key: int(value) for key, value in rows}


# ==============================================================================
# UNIT TESTS: formula commands
# ==============================================================================


def test_render(store_dir, capsys):
    assert run(store_dir, "render", "x^2") == 0

    out = capsys.readouterr().out
    assert out.startswith("<math")
    assert 'display="block"' in out
    assert "<msup>" in out


def test_render_inline(store_dir, capsys):
    assert run(store_dir, "render", "--inline", "x") == 0

    assert 'display="inline"' in capsys.readouterr().out


def test_render_invalid_formula(store_dir, capsys):
    assert run(store_dir, "render", r"\frac{a}") == 1

    captured = capsys.readouterr()
    assert captured.out == ""
    diagnostic = json.loads(captured.err.strip().splitlines()[-1])
    assert diagnostic["severity"] == "error"


def test_validate(store_dir, capsys):
    assert run(store_dir, "validate", "{x") == 1

    line = capsys.readouterr().out.strip()
    assert line.startswith("error\t0\t2\t")
    assert "Missing closing brace" in line


def test_validate_json(store_dir, capsys):
    assert run(store_dir, "--format", "json", "validate", r"x \larr y") == 0

    diagnostics = json.loads(capsys.readouterr().out)
    assert [d["severity"] for d in diagnostics] == ["warning"]
    assert "deprecated" in diagnostics[0]["message"]


def test_validate_corpus(store_dir, capsys):
    assert run(store_dir, "validate", "--corpus", str(PP.FORMULA_CORPUS)) == 0

    lines = capsys.readouterr().out.splitlines()
    assert lines[:2] == ["total\t1000", "parsed\t994"]


def test_validate_needs_input(store_dir, capsys):
    assert run(store_dir, "validate") == 1

    assert "mathkg validate: validate needs a formula or --corpus" in capsys.readouterr().err


def test_chem(store_dir, capsys):
    assert run(store_dir, "chem", "H2O") == 0

    out = capsys.readouterr().out
    assert "<msub>" in out
    assert "\\ce{H2O}" in out


def test_chem_error(store_dir, capsys):
    assert run(store_dir, "chem", "h2o") == 1

    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "Malformed element symbol" in error["message"]


def test_commands(store_dir, capsys):
    assert run(store_dir, "commands") == 0

    lines = capsys.readouterr().out.splitlines()
    assert len([line for line in lines if line]) == 203
    assert all(len(line.split("\t")) == 3 for line in lines if line)


# ==============================================================================
# UNIT TESTS: store commands
# ==============================================================================


def test_seed_and_stats(seeded_dir, capsys):
    counts = stats(seeded_dir, capsys)

    assert counts["items"] == 23
    assert counts["properties"] == 28
    assert counts["indexed_formulas"] == 6
    assert (seeded_dir / PP.INDEX_FILE_NAME).exists()


def test_stats_json(seeded_dir, capsys):
    assert run(seeded_dir, "--format", "json", "stats") == 0

    assert json.loads(capsys.readouterr().out)["items"] == 23


def test_seed_prints_report(store_dir, capsys):
    assert run(store_dir, "seed") == 0

    report = json.loads(capsys.readouterr().out)
    assert report["created"] == 18
    assert report["errors"] == []


def test_import_entity(store_dir, capsys):
    assert run(store_dir, "import", "Q1799", "--depth", "1") == 0

    local = capsys.readouterr().out.strip()
    store = open_store(store_dir)
    assert store.get_entity(local).label() == "error function"
    assert len(store.mappings()) == 5


def test_import_file(store_dir, capsys):
    source = PP.SEED_FIXTURES_DIR / "cran_packages.dcf"

    assert run(store_dir, "import", "--file", str(source)) == 0

    assert json.loads(capsys.readouterr().out)["created"] == 3


def test_import_unknown_entity(store_dir, capsys):
    assert run(store_dir, "import", "Q42") == 1

    assert "mathkg import: No fixture for wikidata:Q42" in capsys.readouterr().err


def test_query(seeded_dir, capsys):
    assert run(seeded_dir, "query", "?f <uses> <imaginary unit>") == 0

    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "?f"
    store = open_store(seeded_dir)
    labels = {store.get_entity(line).label() for line in lines[1:]}
    assert labels == {"DLMF formula 7.2.E3", "DLMF formula 4.14.E1"}


def test_query_transitive(seeded_dir, capsys):
    assert run(seeded_dir, "query", "--transitive", "gamma function", "uses", "--direction", "inverse") == 0

    lines = capsys.readouterr().out.splitlines()
    store = open_store(seeded_dir)
    assert {store.get_entity(line).label() for line in lines} == {
        "DLMF formula 5.4.E6",
        "DLMF formula 5.5.E1",
        "DLMF formula 5.12.E1",
        "DLMF formula 8.2.E1",
    }


def test_query_error(seeded_dir, capsys):
    assert run(seeded_dir, "query", "?f <nope> ?c") == 1

    assert "mathkg query: No property labelled 'nope'" in capsys.readouterr().err


def test_search(seeded_dir, capsys):
    assert run(seeded_dir, "search", "z^2") == 0

    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 1
    item, score = lines[0].split("\t")
    assert open_store(seeded_dir).get_entity(item).label() == "DLMF formula 7.2.E3"
    assert 0 < float(score) < 1


def test_search_invalid_query(seeded_dir, capsys):
    assert run(seeded_dir, "search", "{x") == 1

    assert "mathkg search: Cannot index" in capsys.readouterr().err


def test_homepage(seeded_dir, tmp_path, capsys):
    out_dir = tmp_path / "pages"

    assert run(seeded_dir, "homepage", "DLMF formula 5.4.E6", "--out", str(out_dir)) == 0

    html_path, json_path = capsys.readouterr().out.split()
    assert html_path.endswith(".html") and json_path.endswith(".json")
    assert "<math" in (out_dir / html_path.split("/")[-1]).read_text(encoding="utf-8")


def test_homepage_without_formula(seeded_dir, capsys):
    assert run(seeded_dir, "homepage", "ggplot2") == 1

    assert "has no formula statement" in capsys.readouterr().err


def test_missing_config_file(store_dir, tmp_path, capsys):
    assert main(["--config", str(tmp_path / "absent.yaml"), "commands"]) == 1

    assert "Config file not found" in capsys.readouterr().err


def test_usage_error_exits_with_two():
    with pytest.raises(SystemExit) as exc:
        main([])

    assert exc.value.code == 2
