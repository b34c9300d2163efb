"""
Formula search index.

Every indexed formula is normalized and hashed subtree by subtree. A query
is looked up by the hash of its own normalized tree; candidates are then
verified structurally, so a hash collision can never produce a false hit.
Readers work on an immutable snapshot of the entries; writers swap in a new
one.
"""

import logging
import threading
from collections import Counter
from pathlib import Path
from types import MappingProxyType
from typing import Literal, Mapping

from pydantic import BaseModel, ConfigDict, ValidationError, field_serializer, field_validator

from mathkg.core.exceptions import FormulaIndexError, TexvcSyntaxError
from mathkg.core.paths import ProjectPaths as PP
from mathkg.formula.nodes import LEAF_TYPES, MathNode, iter_subtrees, node_size
from mathkg.formula.normalize import canonical_form, normalize
from mathkg.kg.models import EntityId, MathVal
from mathkg.kg.store import KnowledgeGraphStore
from mathkg.mathml.macros import MacroTable, default_macro_table, expand_semantics

logger = logging.getLogger(__name__)

SearchMode = Literal["exact", "subexpression"]

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a_64(data: bytes | str) -> int:
    if isinstance(data, str):
        data = data.encode("utf-8")
    digest = FNV_OFFSET
    for byte in data:
        digest = ((digest ^ byte) * FNV_PRIME) & _MASK
    return digest


def _hex(digest: int) -> str:
    return f"{digest:016x}"


def _from_hex(value):
    return int(value, 16) if isinstance(value, str) else value


class FormulaIndexEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    item: EntityId
    texvc: str
    normalized_hash: int
    subtree_hashes: frozenset[int]
    token_bag: dict[str, int]
    size: int

    @field_validator("normalized_hash", mode="before")
    @classmethod
    def _hash_from_hex(cls, value):
        return _from_hex(value)

    @field_validator("subtree_hashes", mode="before")
    @classmethod
    def _hashes_from_hex(cls, value):
        return frozenset(_from_hex(v) for v in value)

    @field_serializer("normalized_hash")
    def _hash_to_hex(self, value: int) -> str:
        return _hex(value)

    @field_serializer("subtree_hashes")
    def _hashes_to_hex(self, value: frozenset[int]) -> list[str]:
        return sorted(_hex(v) for v in value)


class SearchHit(BaseModel):
    model_config = ConfigDict(frozen=True)

    item: EntityId
    score: float

    def to_tsv(self) -> str:
        return f"{self.item}\t{self.score:.4f}"


def _token_bag(tree: MathNode) -> Counter:
    return Counter(canonical_form(node) for node in iter_subtrees(tree) if isinstance(node, LEAF_TYPES))


def build_entry(item: EntityId, texvc: str, tree: MathNode) -> FormulaIndexEntry:
    normalized = normalize(tree)
    return FormulaIndexEntry(
        item=item,
        texvc=texvc,
        normalized_hash=fnv1a_64(canonical_form(normalized)),
        subtree_hashes=frozenset(fnv1a_64(canonical_form(n)) for n in iter_subtrees(normalized)),
        token_bag=dict(_token_bag(normalized)),
        size=node_size(normalized),
    )


class FormulaIndex:
    def __init__(self, macro_table: MacroTable | None = None):
        self.macro_table = macro_table or default_macro_table()
        self._lock = threading.Lock()
        self._entries: Mapping[EntityId, FormulaIndexEntry] = MappingProxyType({})
        self._trees: dict[EntityId, MathNode] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, item: object) -> bool:
        return item in self._entries

    def entries(self) -> list[FormulaIndexEntry]:
        snapshot = self._entries
        return [snapshot[item] for item in sorted(snapshot, key=EntityId.sort_key)]

    def _parse(self, texvc: str) -> MathNode:
        try:
            return normalize(expand_semantics(texvc, self.macro_table))
        except TexvcSyntaxError as e:
            raise FormulaIndexError(f"Cannot index {texvc!r}: {e}") from e

    def _tree(self, entry: FormulaIndexEntry) -> MathNode:
        tree = self._trees.get(entry.item)
        if tree is None or self._entries.get(entry.item) is not entry:
            tree = self._parse(entry.texvc)
            self._trees[entry.item] = tree
        return tree

    # ==========================================
    # Writes
    # ==========================================

    def index_formula(self, item: EntityId, texvc: str) -> FormulaIndexEntry:
        """
        Inserts or replaces the entry of ``item``.

        Raises:
            FormulaIndexError: If ``texvc`` does not parse; the index is unchanged.
        """
        tree = self._parse(texvc)
        entry = build_entry(item, texvc, tree)
        with self._lock:
            self._entries = MappingProxyType({**self._entries, item: entry})
            self._trees[item] = tree
        return entry

    def remove(self, item: EntityId) -> None:
        with self._lock:
            entries = dict(self._entries)
            entries.pop(item, None)
            self._entries = MappingProxyType(entries)
            self._trees.pop(item, None)

    def rebuild(self, store: KnowledgeGraphStore) -> int:
        """Reindexes the first formula of every item; returns the entry count."""
        entries: dict[EntityId, FormulaIndexEntry] = {}
        trees: dict[EntityId, MathNode] = {}
        for entity in store.entities("item"):
            formula = next((st.value for st in entity.statements if isinstance(st.value, MathVal)), None)
            if formula is None:
                continue
            try:
                tree = self._parse(formula.texvc)
            except FormulaIndexError as e:
                logger.error(f"Skipping {entity.id}: {e}")
                continue
            entries[entity.id] = build_entry(entity.id, formula.texvc, tree)
            trees[entity.id] = tree
        with self._lock:
            self._entries = MappingProxyType(entries)
            self._trees = trees
        logger.info(f"Rebuilt formula index with {len(entries)} entries")
        return len(entries)

    # ==========================================
    # Search
    # ==========================================

    def search(self, query: str, mode: SearchMode = "subexpression", limit: int = 10) -> list[SearchHit]:
        """
        Exact mode matches whole normalized formulas with score 1.0.
        Subexpression mode matches formulas containing the query as a subtree,
        scored by query size over formula size, best first, ties by item id.

        Raises:
            FormulaIndexError: If the query does not parse or ``limit`` < 1.
        """
        if limit < 1:
            raise FormulaIndexError(f"limit must be >= 1, got {limit}")
        if mode not in ("exact", "subexpression"):
            raise FormulaIndexError(f"Unknown search mode {mode!r}")
        tree = self._parse(query)
        canonical = canonical_form(tree)
        digest = fnv1a_64(canonical)
        size = node_size(tree)
        bag = _token_bag(tree)

        hits = []
        snapshot = self._entries
        for entry in snapshot.values():
            if mode == "exact":
                if entry.normalized_hash == digest and canonical_form(self._tree(entry)) == canonical:
                    hits.append(SearchHit(item=entry.item, score=1.0))
                continue
            if digest not in entry.subtree_hashes:
                continue
            if any(entry.token_bag.get(token, 0) < count for token, count in bag.items()):
                continue
            if any(canonical_form(node) == canonical for node in iter_subtrees(self._tree(entry))):
                hits.append(SearchHit(item=entry.item, score=size / entry.size))
        hits.sort(key=lambda hit: (-hit.score, hit.item.sort_key()))
        return hits[:limit]

    # ==========================================
    # Persistence
    # ==========================================

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            "".join(entry.model_dump_json() + "\n" for entry in self.entries()), encoding="utf-8"
        )
        logger.info(f"Saved {len(self)} index entries to {path}")

    @classmethod
    def load(cls, path: str | Path, macro_table: MacroTable | None = None) -> "FormulaIndex":
        index = cls(macro_table)
        path = Path(path)
        if not path.exists():
            return index
        entries = {}
        for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            try:
                entry = FormulaIndexEntry.model_validate_json(line)
            except ValidationError as e:
                raise FormulaIndexError(f"{path.name}:{number}: malformed entry: {e}") from e
            entries[entry.item] = entry
        index._entries = MappingProxyType(entries)
        return index


def index_path(store_dir: str | Path) -> Path:
    return Path(store_dir) / PP.INDEX_FILE_NAME
