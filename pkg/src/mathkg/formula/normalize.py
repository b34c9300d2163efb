import json

from mathkg.formula.nodes import (
    ChemEquation,
    Command,
    Identifier,
    MathNode,
    Number,
    Operator,
    Row,
    Script,
    SemanticMacro,
)


def normalize(node: MathNode) -> MathNode:
    """
    Canonical form shared by the emitter and the formula index.

    Single-child Rows collapse into their child at every level; Script keeps
    its fields in the fixed (base, sub, sup) layout. Idempotent.
    """
    if isinstance(node, Row):
        children = tuple(normalize(child) for child in node.children)
        if len(children) == 1:
            return children[0]
        return node if children == node.children else Row(children=children)
    if isinstance(node, Command):
        return Command(name=node.name, args=tuple(normalize(a) for a in node.args))
    if isinstance(node, Script):
        return Script(
            base=normalize(node.base),
            sub=normalize(node.sub) if node.sub is not None else None,
            sup=normalize(node.sup) if node.sup is not None else None,
        )
    if isinstance(node, SemanticMacro):
        return SemanticMacro(
            macro_name=node.macro_name,
            rendered=normalize(node.rendered),
            concept_key=node.concept_key,
        )
    if isinstance(node, ChemEquation):
        return ChemEquation(children=tuple(normalize(c) for c in node.children))
    return node


def _atom(value: str) -> str:
    return json.dumps(value, ensure_ascii=False)


def canonical_form(node: MathNode) -> str:
    """S-expression serialization; equal strings iff structurally equal trees."""
    if isinstance(node, Identifier):
        return f"(mi {_atom(node.name)})"
    if isinstance(node, Number):
        return f"(mn {_atom(node.literal)})"
    if isinstance(node, Operator):
        return f"(mo {_atom(node.symbol)})"
    if isinstance(node, Row):
        return "(row" + "".join(" " + canonical_form(c) for c in node.children) + ")"
    if isinstance(node, Command):
        return f"(cmd {_atom(node.name)}" + "".join(" " + canonical_form(a) for a in node.args) + ")"
    if isinstance(node, Script):
        sub = canonical_form(node.sub) if node.sub is not None else "_"
        sup = canonical_form(node.sup) if node.sup is not None else "_"
        return f"(script {canonical_form(node.base)} {sub} {sup})"
    if isinstance(node, SemanticMacro):
        return f"(macro {_atom(node.macro_name)} {canonical_form(node.rendered)})"
    if isinstance(node, ChemEquation):
        return "(ce" + "".join(" " + canonical_form(c) for c in node.children) + ")"
    raise TypeError(f"Not a MathNode: {node!r}")
