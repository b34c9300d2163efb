from mathkg.search.index import (
    FormulaIndex,
    FormulaIndexEntry,
    SearchHit,
    build_entry,
    fnv1a_64,
    index_path,
)

__all__ = [
    "FormulaIndex",
    "FormulaIndexEntry",
    "SearchHit",
    "build_entry",
    "fnv1a_64",
    "index_path",
]
