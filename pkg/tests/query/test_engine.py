import itertools
import json
import random

import pytest

from mathkg.core.exceptions import QueryError
from mathkg.kg import CoreProperties, EntityId, ItemRef, Statement, StringVal, find_property
from mathkg.kg.models import lexical_value
from mathkg.query import (
    BindingSet,
    TextLiteral,
    TriplePattern,
    Var,
    parse_patterns,
    resolve_reference,
    select,
    transitive,
)
from mathkg.query.engine import render

# ==============================================================================
# FIXTURES
# ==============================================================================


@pytest.fixture
def formula(seeded_store, item_id):
    """Looks up a seeded DLMF formula item by its DLMF id."""

    def lookup(dlmf_id: str) -> EntityId:
        return item_id(seeded_store, f"DLMF formula {dlmf_id}")

    return lookup


@pytest.fixture
def uses(seeded_store):
    return find_property(seeded_store, CoreProperties.USES)


def query(store, text):
    return select(store, parse_patterns(text, store))


# ==============================================================================
# UNIT TESTS: pattern text
# ==============================================================================


def test_parse_patterns_resolves_labels_and_aliases(seeded_store, uses, item_id):
    patterns = parse_patterns("?f <uses> <imaginary-unit>", seeded_store)

    assert len(patterns) == 1
    assert patterns[0].subject == Var(name="f")
    assert patterns[0].property == uses
    assert patterns[0].value == item_id(seeded_store, "imaginary unit")


def test_parse_patterns_accepts_ids_and_literals(seeded_store, uses):
    patterns = parse_patterns(f'?f {uses} ?c . ?p <version> "3.5.1" .', seeded_store)

    assert len(patterns) == 2
    assert patterns[0].property == uses
    assert patterns[1].value == TextLiteral(text="3.5.1")


@pytest.mark.parametrize(
    "text, message",
    [
        ("", "Empty query"),
        ("?f <uses>", "syntax error"),
        ('"x" <uses> ?c', "cannot be the subject"),
        ("?f <no such property> ?c", "No property labelled"),
        ("?f <uses> Q999", "Unknown entity Q999"),
    ],
)
def test_parse_patterns_errors(seeded_store, text, message):
    with pytest.raises(QueryError, match=message):
        parse_patterns(text, seeded_store)


def test_resolve_reference_ambiguous(store):
    store.create_entity("item", {"en": "x"}, aliases={"en": ["shared"]})
    store.create_entity("item", {"en": "y"}, aliases={"en": ["shared"]})

    with pytest.raises(QueryError, match="ambiguous"):
        resolve_reference(store, "<shared>", "item")


# ==============================================================================
# UNIT TESTS: select
# ==============================================================================


def test_formulas_using_the_imaginary_unit(seeded_store, formula):
    result = query(seeded_store, "?f <uses> <imaginary unit>")

    assert set(result.column("f")) == {formula("7.2.E3"), formula("4.14.E1")}


def test_join_over_two_patterns(seeded_store, formula, item_id):
    result = query(seeded_store, "?f <uses> ?c . ?c <uses> <gamma function>")

    assert set(result.column("f")) == {formula("5.12.E1"), formula("8.2.E1")}
    assert set(result.column("c")) == {formula("5.4.E6"), formula("5.5.E1")}


def test_literal_value_match(seeded_store, item_id):
    result = query(seeded_store, '?p <version> "3.5.1"')

    assert result.column("p") == [item_id(seeded_store, "ggplot2")]


def test_variable_property(seeded_store, formula):
    result = query(seeded_store, f"{formula('5.12.E1')} ?p ?v")

    labels = {seeded_store.get_entity(p).label() for p in result.column("p")}
    assert {"DLMF ID", "defining formula", "uses symbol concept", "instance of"} == labels


def test_shared_variable_must_agree(store):
    same = store.create_entity("property", {"en": "same as"}, datatype="item")
    a = store.create_entity("item", {"en": "a"})
    b = store.create_entity("item", {"en": "b"})

    store.add_statement(a, Statement(property=same, value=ItemRef(id=a)))
    store.add_statement(b, Statement(property=same, value=ItemRef(id=a)))

    assert query(store, "?x <same as> ?x").column("x") == [a]


def test_no_match_gives_empty_result(seeded_store):
    result = query(seeded_store, '?p <version> "0.0.0"')

    assert len(result) == 0
    assert result.to_tsv() == "?p\n"


def test_select_needs_a_variable(seeded_store):
    with pytest.raises(QueryError, match="at least one variable"):
        query(seeded_store, '<ggplot2> <version> "3.5.1"')


def test_select_needs_patterns(seeded_store):
    with pytest.raises(QueryError, match="at least one pattern"):
        select(seeded_store, [])


def test_results_are_sorted_and_deduplicated(seeded_store, uses):
    result = query(seeded_store, "?f <uses> ?c")

    keys = [row["f"].sort_key() for row in result.rows]
    assert keys == sorted(keys)
    assert len({(str(r["f"]), str(r["c"])) for r in result.rows}) == len(result)


def test_tsv_and_json_output(seeded_store, formula):
    result = query(seeded_store, "?f <uses> <imaginary unit>")

    lines = result.to_tsv().splitlines()
    assert lines[0] == "?f"
    assert sorted(lines[1:]) == sorted([str(formula("7.2.E3")), str(formula("4.14.E1"))])
    assert {row["f"] for row in json.loads(result.to_json())} == set(lines[1:])


def test_string_values_render_lexically(store):
    note = store.create_entity("property", {"en": "note"}, datatype="string")
    item = store.create_entity("item", {"en": "thing"})
    store.add_statement(item, Statement(property=note, value=StringVal(value="hello")))

    assert query(store, "?s <note> ?v").to_tsv() == f"?s\t?v\n{item}\thello\n"


def test_values_of_different_types_stay_distinct():
    q1 = EntityId.parse("Q1")

    result = BindingSet.build(["v"], [{"v": q1}, {"v": StringVal(value="Q1")}, {"v": q1}])

    assert result.column("v") == [q1, StringVal(value="Q1")]
    assert result.to_tsv() == "?v\nQ1\nQ1\n"


# ==============================================================================
# UNIT TESTS: transitive closure
# ==============================================================================


def test_inverse_closure_finds_every_user(seeded_store, uses, formula, item_id):
    gamma = item_id(seeded_store, "gamma function")

    reached = transitive(seeded_store, gamma, uses, "inverse")

    assert reached == {formula("5.4.E6"), formula("5.5.E1"), formula("5.12.E1"), formula("8.2.E1")}


def test_forward_closure(seeded_store, uses, formula, item_id):
    reached = transitive(seeded_store, formula("5.12.E1"), uses)

    assert reached == {formula("5.4.E6"), item_id(seeded_store, "gamma function"), item_id(seeded_store, "pi")}


def test_closure_excludes_start_without_cycle(seeded_store, uses, formula):
    assert formula("5.12.E1") not in transitive(seeded_store, formula("5.12.E1"), uses)


def test_closure_includes_start_on_cycle(store):
    part_of = store.create_entity("property", {"en": "part of"}, datatype="item")
    a = store.create_entity("item", {"en": "a"})
    b = store.create_entity("item", {"en": "b"})

    store.add_statement(a, Statement(property=part_of, value=ItemRef(id=b)))
    store.add_statement(b, Statement(property=part_of, value=ItemRef(id=a)))

    assert transitive(store, a, part_of) == {a, b}


def test_closure_errors(seeded_store, uses, formula):
    with pytest.raises(QueryError, match="Unknown entity Q999"):
        transitive(seeded_store, EntityId.parse("Q999"), uses)
    with pytest.raises(QueryError, match="is not a property"):
        transitive(seeded_store, formula("5.12.E1"), formula("5.4.E6"))
    with pytest.raises(QueryError, match="Unknown direction"):
        transitive(seeded_store, formula("5.12.E1"), uses, "sideways")


# ==============================================================================
# PROPERTY TESTS
# ==============================================================================

NOTES = ["red", "blue", "Q1"]
VAR_NAMES = ["a", "b", "c"]


def random_store(store, rng: random.Random):
    links = [store.create_entity("property", {"en": f"link {n}"}, datatype="item") for n in range(2)]
    note = store.create_entity("property", {"en": "note"}, datatype="string")
    nodes = [store.create_entity("item", {"en": f"node {n}"}) for n in range(6)]
    for node in nodes:
        for _ in range(rng.randint(0, 4)):
            if rng.random() < 0.25:
                store.add_statement(node, Statement(property=note, value=StringVal(value=rng.choice(NOTES))))
            else:
                target = rng.choice(nodes)
                store.add_statement(node, Statement(property=rng.choice(links), value=ItemRef(id=target)))
    return nodes, [*links, note]


def random_pattern(rng: random.Random, nodes, properties) -> TriplePattern:
    def var():
        return Var(name=rng.choice(VAR_NAMES))

    subject = var() if rng.random() < 0.7 else rng.choice(nodes)
    prop = var() if rng.random() < 0.3 else rng.choice(properties)
    roll = rng.random()
    if roll < 0.5:
        value = var()
    elif roll < 0.8:
        value = rng.choice(nodes)
    else:
        value = TextLiteral(text=rng.choice(NOTES))
    if not any(isinstance(t, Var) for t in (subject, prop, value)):
        subject = var()
    return TriplePattern(subject=subject, property=prop, value=value)


def holds(store, pattern: TriplePattern, assignment: dict) -> bool:
    def resolve(term):
        return assignment[term.name] if isinstance(term, Var) else term

    subject, prop = resolve(pattern.subject), resolve(pattern.property)
    if not isinstance(subject, EntityId) or subject not in store:
        return False
    for statement in store.statements(subject):
        if statement.property != prop:
            continue
        value = statement.value.id if isinstance(statement.value, ItemRef) else statement.value
        if isinstance(pattern.value, TextLiteral):
            matched = not isinstance(value, EntityId) and lexical_value(value) == pattern.value.text
        else:
            matched = resolve(pattern.value) == value
        if matched:
            return True
    return False


def typed(values) -> tuple:
    return tuple((type(v).__name__, render(v)) for v in values)


def brute_force(store, patterns: list[TriplePattern]) -> set[tuple]:
    variables = list(dict.fromkeys(v.name for p in patterns for v in p.variables()))
    domain = {e.id for e in store.entities()}
    for entity in store.entities():
        for statement in entity.statements:
            domain.add(statement.value.id if isinstance(statement.value, ItemRef) else statement.value)
    found = set()
    for values in itertools.product(domain, repeat=len(variables)):
        assignment = dict(zip(variables, values))
        if all(holds(store, p, assignment) for p in patterns):
            found.add(typed(values))
    return found


def test_select_agrees_with_brute_force(store):
    rng = random.Random(7)
    nodes, properties = random_store(store, rng)

    for _ in range(60):
        patterns = [random_pattern(rng, nodes, properties) for _ in range(rng.randint(1, 2))]
        result = select(store, patterns)

        rows = {typed(r[n] for n in result.variables) for r in result.rows}
        assert rows == brute_force(store, patterns), patterns
        assert len(rows) == len(result)
