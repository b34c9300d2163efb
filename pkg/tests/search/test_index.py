import random
from concurrent.futures import ThreadPoolExecutor

import pytest

import mathkg.search.index as index_module
from mathkg.core.exceptions import FormulaIndexError
from mathkg.formula import parse_or_raise
from mathkg.formula.nodes import iter_subtrees
from mathkg.formula.normalize import canonical_form, normalize
from mathkg.kg import EntityId
from mathkg.search import FormulaIndex, SearchHit, fnv1a_64, index_path

# ==============================================================================
# FIXTURES
# ==============================================================================

Q1, Q2, Q3 = (EntityId.parse(f"Q{n}") for n in (1, 2, 3))


@pytest.fixture
def seeded_index(seeded_store):
    index = FormulaIndex(seeded_store.macro_table)
    index.rebuild(seeded_store)
    return index


@pytest.fixture
def small_index():
    index = FormulaIndex()
    index.index_formula(Q1, "x^2")
    index.index_formula(Q2, "x^2 + 1")
    index.index_formula(Q3, "y + x")
    return index


def items(hits: list[SearchHit]) -> list[EntityId]:
    return [hit.item for hit in hits]


# ==============================================================================
# UNIT TESTS: hashing
# ==============================================================================


def test_fnv1a_64_reference_values():
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64("a") == 0xAF63DC4C8601EC8C
    assert fnv1a_64("a") == fnv1a_64(b"a")


def test_entry_serializes_hashes_as_hex(small_index):
    entry = small_index.entries()[0]
    dumped = entry.model_dump()

    assert dumped["normalized_hash"] == f"{entry.normalized_hash:016x}"
    assert dumped["subtree_hashes"] == sorted(f"{h:016x}" for h in entry.subtree_hashes)


# ==============================================================================
# UNIT TESTS: search over the seeded store
# ==============================================================================


def test_rebuild_indexes_every_formula(seeded_index):
    assert len(seeded_index) == 6


def test_subexpression_search(seeded_index, seeded_store, item_id):
    hits = seeded_index.search("z^2")

    assert items(hits) == [item_id(seeded_store, "DLMF formula 7.2.E3")]
    assert 0 < hits[0].score < 1


def test_search_through_semantic_macros(seeded_index, seeded_store, item_id):
    hits = seeded_index.search(r"\sqrt{\cpi}")

    assert items(hits) == [item_id(seeded_store, "DLMF formula 5.4.E6")]


def test_exact_search_matches_whole_formula(seeded_index, seeded_store, item_id):
    hits = seeded_index.search(r"\Gamma(z+1) = z\Gamma(z)", mode="exact")

    assert hits == [SearchHit(item=item_id(seeded_store, "DLMF formula 5.5.E1"), score=1.0)]
    assert seeded_index.search("z^2", mode="exact") == []


# ==============================================================================
# UNIT TESTS: ranking and normalization
# ==============================================================================


def test_script_order_does_not_matter():
    index = FormulaIndex()
    index.index_formula(Q1, "x_i^2")

    assert items(index.search("x^2_i", mode="exact")) == [Q1]
    assert items(index.search("x^{2}_{i}")) == [Q1]


def test_smaller_formulas_rank_first(small_index):
    hits = small_index.search("x^2")

    assert hits == [SearchHit(item=Q1, score=1.0), SearchHit(item=Q2, score=0.5)]


def test_ties_break_by_item_id():
    index = FormulaIndex()
    index.index_formula(Q2, "x + 1")
    index.index_formula(Q1, "x + 2")

    hits = index.search("x")

    assert items(hits) == [Q1, Q2]
    assert hits[0].score == hits[1].score == 0.25


def test_limit(small_index):
    assert items(small_index.search("x", limit=2)) == [Q1, Q3]


def test_subexpression_is_structural(small_index):
    assert small_index.search("x + y") == []
    assert items(small_index.search("y + x")) == [Q3]


def test_hash_collisions_are_verified(monkeypatch):
    monkeypatch.setattr(index_module, "fnv1a_64", lambda data: 0)
    index = FormulaIndex()
    index.index_formula(Q1, "a + b")

    assert index.search("b + a") == []
    assert index.search("b + a", mode="exact") == []
    assert items(index.search("a + b", mode="exact")) == [Q1]


def test_hit_to_tsv():
    assert SearchHit(item=Q1, score=0.5).to_tsv() == "Q1\t0.5000"


# ==============================================================================
# UNIT TESTS: errors and writes
# ==============================================================================


@pytest.mark.parametrize(
    "kwargs, message",
    [
        ({"query": "x", "limit": 0}, "limit must be >= 1"),
        ({"query": "x", "mode": "fuzzy"}, "Unknown search mode"),
        ({"query": r"\frac{a}"}, "Cannot index"),
    ],
)
def test_search_errors(small_index, kwargs, message):
    with pytest.raises(FormulaIndexError, match=message):
        small_index.search(**kwargs)


def test_bad_formula_leaves_index_unchanged(small_index):
    with pytest.raises(FormulaIndexError):
        small_index.index_formula(Q1, "{x")

    assert small_index.entries()[0].texvc == "x^2"


def test_reindex_replaces_entry(small_index):
    small_index.index_formula(Q1, "y")

    assert len(small_index) == 3
    assert Q1 not in items(small_index.search("x^2"))


def test_remove(small_index):
    small_index.remove(Q2)
    small_index.remove(EntityId.parse("Q99"))

    assert Q2 not in small_index
    assert items(small_index.search("x^2")) == [Q1]


def test_concurrent_searches_agree(seeded_index):
    expected = seeded_index.search("z")

    with ThreadPoolExecutor(max_workers=8) as pool:
        results = list(pool.map(lambda _: seeded_index.search("z"), range(32)))

    assert all(result == expected for result in results)


# ==============================================================================
# UNIT TESTS: persistence
# ==============================================================================


def test_save_and_load(tmp_path, seeded_index):
    path = index_path(tmp_path)
    seeded_index.save(path)

    loaded = FormulaIndex.load(path, seeded_index.macro_table)

    assert loaded.entries() == seeded_index.entries()
    assert loaded.search("z^2") == seeded_index.search("z^2")


def test_save_is_byte_stable(tmp_path, seeded_index):
    seeded_index.save(tmp_path / "a.jsonl")
    FormulaIndex.load(tmp_path / "a.jsonl").save(tmp_path / "b.jsonl")

    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_load_missing_file_gives_empty_index(tmp_path):
    assert len(FormulaIndex.load(tmp_path / "absent.jsonl")) == 0


def test_load_malformed_entry(tmp_path):
    path = tmp_path / "index.jsonl"
    path.write_text('{"item": "Q1"}\n', encoding="utf-8")

    with pytest.raises(FormulaIndexError, match="index.jsonl:1: malformed entry"):
        FormulaIndex.load(path)


# ==============================================================================
# PROPERTY TESTS
# ==============================================================================

ATOMS = ["x", "y", "z", "1", "2", r"\alpha"]


def random_formula(rng: random.Random, depth: int) -> str:
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(ATOMS)
    a, b = random_formula(rng, depth - 1), random_formula(rng, depth - 1)
    return rng.choice(
        [f"{a} + {b}", f"{a} - {b}", f"{{{a}}}^{{{b}}}", f"{{{a}}}_{{{b}}}", rf"\frac{{{a}}}{{{b}}}", rf"\sqrt{{{a}}}"]
    )


def canonical_subtrees(texvc: str) -> set[str]:
    return {canonical_form(node) for node in iter_subtrees(normalize(parse_or_raise(texvc)))}


def test_search_agrees_with_brute_force():
    rng = random.Random(11)
    formulas = {EntityId.parse(f"Q{n}"): random_formula(rng, 4) for n in range(1, 501)}
    index = FormulaIndex()
    for item, texvc in formulas.items():
        index.index_formula(item, texvc)
    subtrees = {item: canonical_subtrees(texvc) for item, texvc in formulas.items()}
    whole = {item: canonical_form(normalize(parse_or_raise(texvc))) for item, texvc in formulas.items()}

    for _ in range(200):
        query = random_formula(rng, 2)
        target = canonical_form(normalize(parse_or_raise(query)))

        found = set(items(index.search(query, limit=len(formulas))))
        exact = set(items(index.search(query, mode="exact", limit=len(formulas))))

        assert found == {item for item, trees in subtrees.items() if target in trees}, query
        assert exact == {item for item, form in whole.items() if form == target}, query
