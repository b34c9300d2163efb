from mathkg.chem.tokens import (
    Arrow,
    ChargeSign,
    ElementSymbol,
    GroupClose,
    GroupOpen,
    Plus,
    StateAnnotation,
    StoichiometricCoefficient,
    Subscript,
    tokenize_ce,
)
from mathkg.formula.nodes import (
    ChemEquation,
    Command,
    Identifier,
    MathNode,
    Number,
    Operator,
    Row,
    Script,
)

MINUS = "−"
ARROW_SYMBOLS = {"forward": "→", "equilibrium": "⇌"}
_ARROW_SOURCE = {"→": "->", "⇌": "<=>"}


def upright(text: str) -> MathNode:
    """Element symbols and state annotations render as upright text."""
    return Command(name="text", args=(Identifier(name=text),))


def _charge(token: ChargeSign) -> MathNode:
    sign = Operator(symbol=MINUS if token.sign == "-" else "+")
    if not token.magnitude:
        return sign
    return Row(children=(Number(literal=token.magnitude), sign))


def parse_ce(text: str) -> ChemEquation:
    """
    Parses the interior of ``\\ce{...}`` into a ChemEquation.

    Raises:
        ChemSyntaxError: On empty input, malformed element symbols or
            unbalanced parentheses.
    """
    stack: list[list[MathNode]] = [[]]
    for token in tokenize_ce(text):
        current = stack[-1]
        if isinstance(token, StoichiometricCoefficient):
            current.append(Number(literal=token.value))
        elif isinstance(token, ElementSymbol):
            current.append(upright(token.symbol))
        elif isinstance(token, Subscript):
            current[-1] = Script(base=current[-1], sub=Number(literal=token.digits))
        elif isinstance(token, GroupOpen):
            stack.append([Operator(symbol="(")])
        elif isinstance(token, GroupClose):
            group = stack.pop()
            group.append(Operator(symbol=")"))
            stack[-1].append(Row(children=tuple(group)))
        elif isinstance(token, ChargeSign):
            last = current[-1]
            if isinstance(last, Script) and last.sup is None:
                current[-1] = Script(base=last.base, sub=last.sub, sup=_charge(token))
            else:
                current[-1] = Script(base=last, sup=_charge(token))
        elif isinstance(token, StateAnnotation):
            current.append(upright(f"({token.state})"))
        elif isinstance(token, Plus):
            current.append(Operator(symbol="+"))
        elif isinstance(token, Arrow):
            current.append(Operator(symbol=ARROW_SYMBOLS[token.kind]))
    return ChemEquation(children=tuple(stack[0]))


# ==========================================
# Printing back to mhchem
# ==========================================


def _charge_source(node: MathNode) -> str:
    if isinstance(node, Operator):
        return "-" if node.symbol == MINUS else node.symbol
    if isinstance(node, Row):
        return "".join(_charge_source(child) for child in node.children)
    if isinstance(node, Number):
        return node.literal
    raise ValueError(f"Not a charge: {node!r}")


def _piece(node: MathNode) -> str:
    if isinstance(node, Command) and isinstance(node.args[0], Identifier):
        return node.args[0].name
    if isinstance(node, Number):
        return node.literal
    if isinstance(node, Operator):
        return node.symbol
    if isinstance(node, Row):
        return "".join(_piece(child) for child in node.children)
    if isinstance(node, Script):
        out = _piece(node.base)
        if node.sub is not None:
            out += _piece(node.sub)
        if node.sup is not None:
            out += "^{" + _charge_source(node.sup) + "}"
        return out
    raise ValueError(f"Unexpected node in chemical equation: {node!r}")


def to_mhchem(equation: ChemEquation) -> str:
    """Prints a ChemEquation as mhchem source that parses back to the same tree."""
    words: list[str] = []
    species = ""
    for child in equation.children:
        if isinstance(child, Operator) and child.symbol in ("+", *_ARROW_SOURCE):
            if species:
                words.append(species)
                species = ""
            words.append(_ARROW_SOURCE.get(child.symbol, child.symbol))
            continue
        piece = _piece(child)
        if species and isinstance(child, Number):
            words.append(species)
            species = ""
        species += piece
    if species:
        words.append(species)
    return " ".join(words)
