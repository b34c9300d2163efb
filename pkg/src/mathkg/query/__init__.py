from mathkg.query.engine import BindingSet, select, transitive
from mathkg.query.homepage import (
    HomepageDoc,
    LinkedConcept,
    formula_homepage,
    store_link_resolver,
    write_homepage,
)
from mathkg.query.patterns import TextLiteral, TriplePattern, Var, parse_patterns, resolve_reference

__all__ = [
    "BindingSet",
    "HomepageDoc",
    "LinkedConcept",
    "TextLiteral",
    "TriplePattern",
    "Var",
    "formula_homepage",
    "parse_patterns",
    "resolve_reference",
    "select",
    "store_link_resolver",
    "transitive",
    "write_homepage",
]
