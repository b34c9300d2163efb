from pathlib import Path


class ProjectPaths:
    """Centralizes all bundled resource paths and store file names."""

    # Bundled resources (shipped inside the package)
    RESOURCES_DIR = Path(__file__).resolve().parent.parent / "resources"
    COMMAND_REGISTRY = RESOURCES_DIR / "commands.tsv"
    ALIAS_TABLE = RESOURCES_DIR / "aliases.tsv"
    MACRO_TABLE = RESOURCES_DIR / "macros.tsv"
    EXTERNAL_ID_REGISTRY = RESOURCES_DIR / "external_ids.tsv"
    PROPERTY_MAP = RESOURCES_DIR / "property_map.tsv"
    CONCEPT_CATALOGUE = RESOURCES_DIR / "concepts.tsv"
    CE_SUITE = RESOURCES_DIR / "ce_suite.tsv"

    # Formula corpus
    CORPUS_DIR = RESOURCES_DIR / "corpus"
    FORMULA_CORPUS = CORPUS_DIR / "wikipedia_sample.txt"
    CORPUS_FAILURES = CORPUS_DIR / "known_failures.tsv"

    # Fixtures
    FIXTURES_DIR = RESOURCES_DIR / "fixtures"
    SEED_FIXTURES_DIR = FIXTURES_DIR / "seed"
    WIKIDATA_FIXTURES_DIR = FIXTURES_DIR / "wikidata"

    # Store layout (relative to the configured store directory)
    DEFAULT_STORE_DIR = Path("data") / "store"
    ENTITIES_FILE_NAME = "entities.jsonl"
    MAPPINGS_FILE_NAME = "mappings.jsonl"
    INDEX_FILE_NAME = "formula_index.jsonl"
    HOMEPAGE_DIR_NAME = "homepages"
