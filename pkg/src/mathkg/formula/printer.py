"""Canonical texvc pretty-printer: parse(to_texvc(t)) == t for parsed trees."""

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
    is_fenced,
)

_RAW_TEXT_COMMANDS = frozenset({"text", "mbox", "textrm", "operatorname"})


def _braced(node: MathNode) -> str:
    return "{" + to_texvc(node) + "}"


def _delimiter(node: MathNode) -> str:
    return node.symbol if isinstance(node, Operator) else to_texvc(node)


def _command(node: Command) -> str:
    if node.name in _RAW_TEXT_COMMANDS and isinstance(node.args[0], Identifier):
        return f"\\{node.name}{{{node.args[0].name}}}"
    if node.name in ("left", "right"):
        return f"\\{node.name}{_delimiter(node.args[0])}"
    if node.name == "sqrt" and len(node.args) == 2:
        return f"\\sqrt[{to_texvc(node.args[1])}]{_braced(node.args[0])}"
    return f"\\{node.name}" + "".join(_braced(arg) for arg in node.args)


def _script(node: Script) -> str:
    base = to_texvc(node.base)
    if isinstance(node.base, Script):
        base = "{" + base + "}"
    out = base
    if node.sub is not None:
        out += "_" + _braced(node.sub)
    if node.sup is not None:
        out += "^" + _braced(node.sup)
    return out


def to_texvc(node: MathNode) -> str:
    """Prints a tree as texvc; every non-fenced Row prints inside braces."""
    if isinstance(node, Identifier):
        return node.name
    if isinstance(node, Number):
        return node.literal
    if isinstance(node, Operator):
        return node.symbol
    if isinstance(node, Row):
        inner = " ".join(to_texvc(child) for child in node.children)
        return inner if is_fenced(node) else "{" + inner + "}"
    if isinstance(node, Command):
        return _command(node)
    if isinstance(node, Script):
        return _script(node)
    if isinstance(node, SemanticMacro):
        return f"\\{node.macro_name}"
    if isinstance(node, ChemEquation):
        from mathkg.chem.parser import to_mhchem

        return f"\\ce{{{to_mhchem(node)}}}"
    raise TypeError(f"Not a MathNode: {node!r}")
