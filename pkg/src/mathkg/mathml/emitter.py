"""
Presentation MathML from MathNode trees.

The tree is walked root first and every node becomes one MathML element
(fonts, fences and binomials add a wrapping ``mrow``). Output is canonical:
attributes are written in alphabetical order and no whitespace is inserted,
so the same tree always serializes to the same bytes.
"""

import logging
from typing import Callable, Literal

from lxml import etree
from pydantic import BaseModel, ConfigDict

from mathkg.core.exceptions import UnresolvedConceptError
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
from mathkg.formula.parser import NON_XML_CHAR
from mathkg.formula.printer import to_texvc
from mathkg.formula.registry import CommandRegistry, CommandSpec, default_registry
from mathkg.mathml.macros import MacroTable, default_macro_table

logger = logging.getLogger(__name__)


def xml_safe(text: str) -> str:
    """Replaces characters XML 1.0 cannot represent with U+FFFD."""
    return NON_XML_CHAR.sub("\ufffd", text)


MATHML_NS = "http://www.w3.org/1998/Math/MathML"
TEX_ENCODING = "application/x-tex"

VOCABULARY = frozenset(
    {
        "math",
        "mrow",
        "mi",
        "mn",
        "mo",
        "msub",
        "msup",
        "msubsup",
        "mfrac",
        "msqrt",
        "mroot",
        "mtext",
        "mspace",
        "mover",
        "munder",
        "munderover",
        "semantics",
        "annotation",
    }
)

CHARACTER_MAP = {"-": "−", "*": "∗", "'": "′"}

SPACE_WIDTHS = {
    "quad": "1em",
    "qquad": "2em",
    ",": "0.1667em",
    ":": "0.2222em",
    ";": "0.2778em",
    "!": "-0.1667em",
}

FONT_VARIANTS = {
    "mathrm": "normal",
    "mathbf": "bold",
    "mathit": "italic",
    "mathsf": "sans-serif",
    "mathcal": "script",
    "mathbb": "double-struck",
    "boldsymbol": "bold-italic",
}

FRACTION_STYLES = {"frac": None, "dfrac": "true", "tfrac": "false"}

STRETCHY_ACCENTS = frozenset({"widehat", "widetilde", "overline", "overrightarrow", "underline"})
UNDER_ACCENTS = frozenset({"underline"})

# Bases whose scripts are set as limits above and below.
LIMIT_BASES = frozenset(
    {
        "\\sum",
        "\\prod",
        "\\coprod",
        "\\bigcup",
        "\\bigcap",
        "\\lim",
        "\\max",
        "\\min",
        "\\sup",
        "\\inf",
        "\\det",
        "\\gcd",
        "\\Pr",
    }
)

_UPPER_GREEK = range(0x391, 0x3AA)


class EmitOptions(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    display: Literal["block", "inline"] = "block"
    resolve_links: bool = False
    link_resolver: Callable[[str], str | None] | None = None
    macro_table: MacroTable | None = None
    registry: CommandRegistry | None = None
    source: str | None = None


class _Emitter:
    def __init__(self, opts: EmitOptions, namespace: str | None):
        self.opts = opts
        self.namespace = namespace
        self.registry = opts.registry or default_registry()
        self.macros = opts.macro_table or default_macro_table()

    def el(self, tag: str, *children: etree._Element, text: str | None = None, **attrs: str):
        name = f"{{{self.namespace}}}{tag}" if self.namespace else tag
        element = etree.Element(name)
        for key in sorted(attrs):
            element.set(key, xml_safe(attrs[key]))
        if text is not None:
            element.text = xml_safe(text)
        element.extend(children)
        return element

    def spec(self, symbol: str) -> CommandSpec | None:
        name = symbol[1:]
        return self.registry.get(name) if name in self.registry else None

    # ==========================================
    # Node dispatch
    # ==========================================

    def emit(self, node: MathNode, variant: str | None = None) -> etree._Element:
        if isinstance(node, Identifier):
            return self.identifier(node, variant)
        if isinstance(node, Number):
            return self.el("mn", text=node.literal)
        if isinstance(node, Operator):
            return self.operator(node.symbol)
        if isinstance(node, Row):
            if is_fenced(node):
                return self.fence(node, variant)
            return self.el("mrow", *(self.emit(c, variant) for c in node.children))
        if isinstance(node, Command):
            return self.command(node, variant)
        if isinstance(node, Script):
            return self.script(node, variant)
        if isinstance(node, SemanticMacro):
            return self.macro(node, variant)
        if isinstance(node, ChemEquation):
            return self.el("mrow", *(self.emit(c) for c in node.children))
        raise TypeError(f"Not a MathNode: {node!r}")

    def identifier(self, node: Identifier, variant: str | None) -> etree._Element:
        attrs = {}
        if node.name.startswith("\\"):
            if node.unicode_hint is not None:
                text = chr(node.unicode_hint)
                if node.unicode_hint in _UPPER_GREEK:
                    attrs["mathvariant"] = "normal"
            else:
                text = node.name[1:]
        else:
            text = node.name
        if variant is not None:
            attrs["mathvariant"] = variant
        return self.el("mi", text=text, **attrs)

    def operator(self, symbol: str, **attrs: str) -> etree._Element:
        if not symbol.startswith("\\"):
            return self.el("mo", text=CHARACTER_MAP.get(symbol, symbol), **attrs)
        spec = self.spec(symbol)
        name = symbol[1:]
        if spec is not None and spec.output_class == "space":
            return self.el("mspace", width=SPACE_WIDTHS.get(name, "0.2222em"))
        if spec is not None and spec.char is not None:
            return self.el("mo", text=spec.char, **attrs)
        return self.el("mo", text=name, **attrs)

    def fence(self, node: Row, variant: str | None) -> etree._Element:
        left, body, right = node.children
        return self.el(
            "mrow",
            self.delimiter(left.args[0]),  # type: ignore[union-attr]
            self.emit(body, variant),
            self.delimiter(right.args[0]),  # type: ignore[union-attr]
        )

    def delimiter(self, node: MathNode) -> etree._Element:
        symbol = node.symbol if isinstance(node, Operator) else ""
        if symbol == ".":
            return self.el("mo", fence="true", stretchy="true")
        return self.operator(symbol, fence="true", stretchy="true")

    def command(self, node: Command, variant: str | None) -> etree._Element:
        name, args = node.name, node.args
        spec = self.registry.get(name) if name in self.registry else None

        if name in FRACTION_STYLES:
            style = FRACTION_STYLES[name]
            attrs = {"displaystyle": style} if style else {}
            return self.el("mfrac", *(self.emit(a, variant) for a in args), **attrs)
        if name == "binom":
            return self.el(
                "mrow",
                self.el("mo", text="("),
                self.el("mfrac", *(self.emit(a, variant) for a in args), linethickness="0"),
                self.el("mo", text=")"),
            )
        if name == "sqrt":
            if len(args) == 2:
                return self.el("mroot", self.emit(args[0], variant), self.emit(args[1], variant))
            return self.el("msqrt", self.emit(args[0], variant))
        if name in ("overset", "stackrel"):
            return self.el("mover", self.emit(args[1], variant), self.emit(args[0], variant))
        if name == "underset":
            return self.el("munder", self.emit(args[1], variant), self.emit(args[0], variant))
        if name in FONT_VARIANTS:
            return self.el("mrow", self.emit(args[0], FONT_VARIANTS[name]))
        if name == "operatorname" and isinstance(args[0], Identifier):
            return self.el("mi", text=args[0].name)
        if spec is not None and spec.output_class == "text" and isinstance(args[0], Identifier):
            return self.el("mtext", text=args[0].name)
        if spec is not None and spec.output_class == "accent":
            return self.accent(name, spec, self.emit(args[0], variant))
        if name in ("left", "right"):
            return self.delimiter(args[0])
        return self.el("mrow", *(self.emit(a, variant) for a in args))

    def accent(self, name: str, spec: CommandSpec, base: etree._Element) -> etree._Element:
        stretchy = "true" if name in STRETCHY_ACCENTS else "false"
        mark = self.el("mo", text=spec.char or "", stretchy=stretchy)
        if name in UNDER_ACCENTS:
            return self.el("munder", base, mark, accentunder="true")
        return self.el("mover", base, mark, accent="true")

    def script(self, node: Script, variant: str | None) -> etree._Element:
        base = node.base
        limits = (isinstance(base, Operator) and base.symbol in LIMIT_BASES) or (
            isinstance(base, Identifier) and base.name in LIMIT_BASES
        )
        parts = [self.emit(base, variant)]
        if node.sub is not None:
            parts.append(self.emit(node.sub, variant))
        if node.sup is not None:
            parts.append(self.emit(node.sup, variant))
        if node.sub is not None and node.sup is not None:
            tag = "munderover" if limits else "msubsup"
        elif node.sub is not None:
            tag = "munder" if limits else "msub"
        else:
            tag = "mover" if limits else "msup"
        return self.el(tag, *parts)

    def macro(self, node: SemanticMacro, variant: str | None) -> etree._Element:
        rendered = self.emit(node.rendered, variant)
        if not self.opts.resolve_links:
            return rendered
        url = None
        if self.opts.link_resolver is not None:
            url = self.opts.link_resolver(node.concept_key)
        if url is None:
            url = self.macros.fallback_url(node.macro_name)
        if url is None:
            raise UnresolvedConceptError(
                f"No link target for \\{node.macro_name} (concept {node.concept_key!r})"
            )
        return self.el("mrow", rendered, href=url)


def _serialize(element: etree._Element) -> str:
    return etree.tostring(element, encoding="unicode")


def emit_mathml(ast: MathNode, opts: EmitOptions | None = None) -> str:
    """
    Renders a tree as one MathML ``math`` document with a TeX annotation.

    Raises:
        UnresolvedConceptError: When links are on and a semantic macro has
            neither a resolved URL nor a fallback URL.
    """
    opts = opts or EmitOptions()
    emitter = _Emitter(opts, MATHML_NS)
    body = emitter.emit(ast)
    source = opts.source if opts.source is not None else to_texvc(ast)
    annotation = emitter.el("annotation", text=source, encoding=TEX_ENCODING)
    semantics = emitter.el("semantics", body, annotation)
    root = etree.Element(f"{{{MATHML_NS}}}math", nsmap={None: MATHML_NS})
    root.set("display", opts.display)
    root.append(semantics)
    return _serialize(root)


def emit_fragment(ast: MathNode, opts: EmitOptions | None = None) -> str:
    """The rendered element alone, without namespace, wrapper or annotation."""
    return _serialize(_Emitter(opts or EmitOptions(), None).emit(ast))


def mathml_violations(document: str) -> list[str]:
    """
    Element names outside the presentation vocabulary.

    Raises:
        lxml.etree.XMLSyntaxError: If the document is not well-formed.
    """
    root = etree.fromstring(document.encode("utf-8"))
    found = set()
    for element in root.iter():
        qname = etree.QName(element)
        if qname.namespace not in (None, MATHML_NS) or qname.localname not in VOCABULARY:
            found.add(qname.text)
    return sorted(found)
