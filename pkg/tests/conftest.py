import pytest

from mathkg.core.paths import ProjectPaths as PP
from mathkg.importer import FixtureConnector, seed
from mathkg.kg import KnowledgeGraphStore

# ==============================================================================
# SHARED FIXTURES
# ==============================================================================


@pytest.fixture
def store():
    """An empty store with the bundled macro table and identifier registry."""
    return KnowledgeGraphStore()


@pytest.fixture
def seeded_store():
    """A store loaded with the bundled CRAN, DLMF and bibliographic fixtures."""
    kg = KnowledgeGraphStore()
    seed(kg, PP.SEED_FIXTURES_DIR)
    return kg


@pytest.fixture
def wikidata_connector():
    return FixtureConnector(PP.WIKIDATA_FIXTURES_DIR)


@pytest.fixture
def item_id():
    """Looks up the single item carrying an English label or alias."""

    def lookup(kg: KnowledgeGraphStore, label: str):
        found = kg.find_by_label(label, kind="item")
        assert len(found) == 1, f"{label!r} matches {found}"
        return found[0]

    return lookup
