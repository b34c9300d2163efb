"""Language-independent parse tree for texvc formulas.

Every node is an immutable pydantic model tagged by ``kind``. Child lists are
tuples so trees are hashable and can be shared between threads.
"""

from __future__ import annotations

from typing import Annotated, Iterator, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Node(BaseModel):
    model_config = ConfigDict(frozen=True)


class Identifier(_Node):
    """A letter (``x``) or an identifier-class control word (``\\alpha``)."""

    kind: Literal["identifier"] = "identifier"
    name: str
    unicode_hint: int | None = None


class Number(_Node):
    kind: Literal["number"] = "number"
    literal: str


class Operator(_Node):
    """A literal operator character or an operator/space control word."""

    kind: Literal["operator"] = "operator"
    symbol: str


class Row(_Node):
    kind: Literal["row"] = "row"
    children: tuple[MathNode, ...] = ()


class Command(_Node):
    """A command with arguments; ``name`` carries no leading backslash."""

    kind: Literal["command"] = "command"
    name: str
    args: tuple[MathNode, ...] = Field(min_length=1)


class Script(_Node):
    kind: Literal["script"] = "script"
    base: MathNode
    sub: MathNode | None = None
    sup: MathNode | None = None

    @model_validator(mode="after")
    def _has_script(self) -> Script:
        if self.sub is None and self.sup is None:
            raise ValueError("Script needs a subscript or a superscript")
        return self


class SemanticMacro(_Node):
    kind: Literal["macro"] = "macro"
    macro_name: str
    rendered: MathNode
    concept_key: str = Field(min_length=1)

    @model_validator(mode="after")
    def _no_nested_semantics(self) -> SemanticMacro:
        if any(isinstance(n, SemanticMacro) for n in iter_subtrees(self.rendered)):
            raise ValueError(f"Macro {self.macro_name!r} renders another macro")
        return self


class ChemEquation(_Node):
    kind: Literal["chem"] = "chem"
    children: tuple[MathNode, ...] = Field(min_length=1)


MathNode = Annotated[
    Union[
        Identifier,
        Number,
        Operator,
        Row,
        Command,
        Script,
        SemanticMacro,
        ChemEquation,
    ],
    Field(discriminator="kind"),
]

for _model in (Row, Command, Script, SemanticMacro, ChemEquation):
    _model.model_rebuild()

LEAF_TYPES = (Identifier, Number, Operator)


def children_of(node: MathNode) -> tuple[MathNode, ...]:
    """Direct children in document order."""
    if isinstance(node, (Row, ChemEquation)):
        return node.children
    if isinstance(node, Command):
        return node.args
    if isinstance(node, Script):
        return tuple(n for n in (node.base, node.sub, node.sup) if n is not None)
    if isinstance(node, SemanticMacro):
        return (node.rendered,)
    return ()


def iter_subtrees(node: MathNode) -> Iterator[MathNode]:
    """Pre-order walk over ``node`` and all of its descendants."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(children_of(current)))


def node_size(node: MathNode) -> int:
    return sum(1 for _ in iter_subtrees(node))


def row_or_single(items: list[MathNode] | tuple[MathNode, ...]) -> MathNode:
    """Collapses a parsed item list: one item stands alone, otherwise a Row."""
    if len(items) == 1:
        return items[0]
    return Row(children=tuple(items))


def is_fenced(node: MathNode) -> bool:
    """True for the Row produced by ``\\left ... \\right``."""
    return (
        isinstance(node, Row)
        and len(node.children) == 3
        and isinstance(node.children[0], Command)
        and node.children[0].name == "left"
        and isinstance(node.children[2], Command)
        and node.children[2].name == "right"
    )
