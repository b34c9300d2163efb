import pytest

from mathkg.core.exceptions import DatatypeMismatchError, ExternalIdError, RegistryError
from mathkg.kg import (
    CoreProperties,
    ExternalIdRegistry,
    ExternalIdType,
    bootstrap_core_properties,
    default_id_registry,
    ensure_item,
    ensure_property,
    find_property,
)
from mathkg.kg.schema import CORE_PROPERTIES, property_for_id_type

# ==============================================================================
# UNIT TESTS: core properties
# ==============================================================================


def test_bootstrap_defines_core_and_identifier_properties(store):
    created = bootstrap_core_properties(store)

    assert len(CORE_PROPERTIES) == 16
    assert len(created) == 28
    assert len(store.entities("property")) == 28
    assert store.get_entity(created[CoreProperties.DEFINING_FORMULA]).datatype == "math"
    assert store.get_entity(created["DOI"]).datatype == "external-id"


def test_bootstrap_is_idempotent(store):
    first = bootstrap_core_properties(store)
    second = bootstrap_core_properties(store)

    assert first == second
    assert len(store.entities("property")) == 28


def test_uses_property_has_short_alias(store):
    bootstrap_core_properties(store)

    assert find_property(store, "uses") == find_property(store, CoreProperties.USES)


def test_ensure_property_refuses_other_datatype(store):
    ensure_property(store, "title", "string")

    with pytest.raises(DatatypeMismatchError, match="exists as string"):
        ensure_property(store, "title", "url")


def test_property_for_id_type(store):
    wikidata = property_for_id_type(store, "wikidata")

    assert store.get_entity(wikidata).label() == CoreProperties.WIKIDATA_QID
    assert property_for_id_type(store, "DOI") == find_property(store, "DOI")


def test_ensure_item_reuses_exact_label(store):
    first = ensure_item(store, "formula", "a mathematical formula")
    second = ensure_item(store, "formula")

    assert first == second
    assert store.get_entity(first).descriptions == {"en": "a mathematical formula"}


# ==============================================================================
# UNIT TESTS: identifier registry
# ==============================================================================


@pytest.mark.parametrize(
    "id_type, value",
    [
        ("DOI", "10.1007/978-3-030-81097-9_2"),
        ("ORCID iD", "0000-0002-1825-0097"),
        ("DLMF ID", "5.2.E1"),
        ("zbMATH document ID", "1234.56789"),
        ("arXiv ID", "2107.00123v2"),
        ("MSC ID", "33B15"),
        ("CRAN Project", "ggplot2"),
    ],
)
def test_registered_patterns_accept(id_type, value):
    default_id_registry().check(id_type, value)


@pytest.mark.parametrize(
    "id_type, value",
    [
        ("DOI", "11.1000/x"),
        ("ORCID iD", "0000-0002-1825"),
        ("MSC ID", "3"),
        ("CRAN Project", "2pkg"),
    ],
)
def test_registered_patterns_reject(id_type, value):
    with pytest.raises(ExternalIdError):
        default_id_registry().check(id_type, value)


def test_registry_size_and_urls():
    registry = default_id_registry()

    assert len(registry) == 12
    assert registry.url_for("DOI", "10.1000/1") == "https://doi.org/10.1000/1"
    assert registry.url_for("ISBN", "1") is None


def test_registry_rejects_bad_patterns():
    bad = ExternalIdType(name="x", kind="extrinsic", value_pattern="[0-9", url_template="$1")

    with pytest.raises(RegistryError, match="Bad pattern"):
        ExternalIdRegistry([bad])
