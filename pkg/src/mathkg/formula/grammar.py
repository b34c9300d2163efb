"""
Parsing expression grammar for the supported texvc subset.

The grammar is assembled with pyparsing from the command registry, so growing
the registry file grows the language without touching this module. Parse
actions build MathNode values directly; warnings raised while parsing are
collected through a context variable, which keeps a shared grammar safe to use
from several threads at once.
"""

import re
from contextvars import ContextVar
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from pyparsing import (
    Forward,
    Literal,
    MatchFirst,
    NoMatch,
    Optional,
    ParserElement,
    ParseResults,
    ParseSyntaxException,
    Regex,
    Suppress,
    ZeroOrMore,
)

from mathkg.core.exceptions import ChemSyntaxError, MacroConfigurationError
from mathkg.formula.diagnostics import Diagnostic
from mathkg.formula.nodes import (
    Command,
    Identifier,
    MathNode,
    Number,
    Operator,
    Row,
    Script,
    SemanticMacro,
    row_or_single,
)
from mathkg.formula.registry import (
    DELIMITER_COMMANDS,
    STRUCTURAL_COMMANDS,
    CommandRegistry,
)

collected_warnings: ContextVar[list[Diagnostic] | None] = ContextVar(
    "collected_warnings", default=None
)


class GrammarFault(ParseSyntaxException):
    """A fatal parse failure raised from a parse action, with an explicit span."""

    def __init__(
        self,
        pstr: str,
        loc: int,
        msg: str,
        *,
        end: int | None = None,
        expected: tuple[str, ...] = (),
    ):
        super().__init__(pstr, loc, msg)
        self.end = loc + 1 if end is None else end
        self.expected = expected


@dataclass(frozen=True)
class _ScriptPart:
    position: str
    node: MathNode


@dataclass(frozen=True)
class _RadicalIndex:
    node: MathNode


def csnames(names: Iterable[str]) -> ParserElement:
    """Matches ``\\name`` for any of ``names``; control words may not run on into letters."""
    names = list(names)
    if not names:
        return NoMatch()
    alpha = sorted(n for n in names if n[-1].isalpha())
    other = sorted(n for n in names if not n[-1].isalpha())
    parts = []
    if alpha:
        parts.append("(?:{})(?![A-Za-z])".format("|".join(map(re.escape, alpha))))
    parts.extend(map(re.escape, other))
    return Regex(r"\\(?:{})".format("|".join(parts)))


def _warn(diagnostic: Diagnostic) -> None:
    sink = collected_warnings.get()
    if sink is not None:
        sink.append(diagnostic)


class TexvcGrammar:
    def __init__(self, registry: CommandRegistry, macros: Mapping[str, SemanticMacro]):
        clashes = sorted(set(macros) & ({s.name for s in registry} | set(registry.aliases)))
        if clashes:
            raise MacroConfigurationError(
                f"Semantic macros collide with registry commands: {', '.join(clashes)}"
            )
        self.registry = registry
        self.macros = dict(macros)
        self.expression = self._build()
        self.expression.parse_with_tabs()
        self.expression.streamline()

    def parse(self, text: str) -> MathNode:
        tokens = self.expression.parse_string(text, parse_all=True)
        return row_or_single(list(tokens))

    # ==========================================
    # Grammar assembly
    # ==========================================

    def _with_aliases(self, names: Iterable[str]) -> list[str]:
        wanted = set(names)
        return sorted(wanted | {a for a, t in self.registry.aliases.items() if t in wanted})

    def _build(self) -> ParserElement:
        reg = self.registry
        text_class = set(reg.names(output_class="text"))
        special = STRUCTURAL_COMMANDS | text_class

        items = Forward().set_name("formula")
        item = Forward().set_name("item")
        arg = Forward()

        letter = Regex(r"[A-Za-z]").set_name("letter")
        letter.set_parse_action(lambda t: Identifier(name=t[0]))
        digit = Regex(r"[0-9]").set_name("digit")
        digit.set_parse_action(lambda t: Number(literal=t[0]))
        number = Regex(r"[0-9]+(?:\.[0-9]+)?").set_name("number")
        number.set_parse_action(lambda t: Number(literal=t[0]))
        op_char = Regex(r"[-+*/=<>()\[\]|,;:!'.?]").set_name("operator")
        op_char.set_parse_action(lambda t: Operator(symbol=t[0]))
        unknown = Regex(r"\\(?!right(?![A-Za-z]))(?:[A-Za-z]+|[^A-Za-z])")
        unknown.set_name("supported command").set_parse_action(self._unknown_command)

        leaf = csnames(self._with_aliases(reg.names(arity=0))).set_name("symbol")
        leaf.set_parse_action(self._leaf)

        macro = csnames(sorted(self.macros)).set_name("semantic macro")
        macro.set_parse_action(lambda t: self.macros[t[0][1:]])

        group = (Suppress("{") + items - Suppress("}")).set_name("group")
        group.set_parse_action(lambda t: row_or_single(list(t)))

        atoms: list[ParserElement] = [group]

        if "left" in reg and "right" in reg:
            delim_names = sorted(DELIMITER_COMMANDS & {s.name for s in reg})
            delim_cs = csnames(delim_names).set_parse_action(lambda t: Operator(symbol=t[0]))
            delim_char = Regex(r"[()\[\]|/.]").set_parse_action(lambda t: Operator(symbol=t[0]))
            delim = (delim_cs | delim_char).set_name("delimiter")
            right = Regex(r"\\right(?![A-Za-z])").set_name("\\right")
            fence = Regex(r"\\left(?![A-Za-z])") - delim + items + right + delim
            atoms.append(fence.set_name("fence").set_parse_action(self._fence))

        if "sqrt" in reg:
            index = Suppress("[") + ZeroOrMore(~Literal("]") + item) + Suppress("]")
            index.set_parse_action(lambda t: _RadicalIndex(row_or_single(list(t))))
            sqrt = csnames(["sqrt"]) + Optional(index) - arg
            atoms.append(sqrt.set_name("radical").set_parse_action(self._sqrt))

        raw_braced = Regex(r"\{[^{}]*(?:\{[^{}]*\}[^{}]*)*\}").set_name("{text}")
        text_names = sorted(text_class - {"ce"})
        if text_names:
            text_cmd = csnames(text_names) - raw_braced
            atoms.append(text_cmd.set_name("text").set_parse_action(self._text))
        if "ce" in reg:
            ce_cmd = csnames(["ce"]) - raw_braced
            atoms.append(ce_cmd.set_name("chemistry").set_parse_action(self._chem))

        atoms.append(macro)
        for arity in (1, 2, 3):
            names = [n for n in reg.names(arity=arity) if n not in special]
            if not names:
                continue
            expr: ParserElement = csnames(self._with_aliases(names))
            for _ in range(arity):
                expr = expr - arg
            atoms.append(expr.set_name(f"command/{arity}").set_parse_action(self._command))

        atoms.extend([leaf, number, letter, op_char, unknown])
        atom = MatchFirst(atoms).set_name("term")

        arg <<= MatchFirst([group, digit, letter, macro, leaf, op_char, unknown]).set_name(
            "argument"
        )

        scripted = (atom + Optional(self._script_tail(arg))).set_parse_action(self._scripted)
        dangling = self._script_tail(arg).set_parse_action(self._dangling)
        item <<= dangling | scripted

        items <<= ZeroOrMore(item)
        return items

    def _script_tail(self, arg: ParserElement) -> ParserElement:
        sup = (Suppress("^") - arg).set_parse_action(lambda t: _ScriptPart("sup", t[0]))
        sub = (Suppress("_") - arg).set_parse_action(lambda t: _ScriptPart("sub", t[0]))
        repeated = Regex(r"[\^_]").set_parse_action(self._double_script)
        return ((sup + Optional(sub)) | (sub + Optional(sup))) + Optional(repeated)

    # ==========================================
    # Parse actions
    # ==========================================

    def _canonical(self, s: str, loc: int, token: str) -> str:
        raw = token[1:]
        target = self.registry.aliases.get(raw)
        if target is None:
            return raw
        _warn(
            Diagnostic.at(
                s,
                loc,
                loc + len(token),
                f"\\{raw} is deprecated; use \\{target}",
                severity="warning",
                expected=(f"\\{target}",),
            )
        )
        return target

    def _leaf(self, s: str, loc: int, toks: ParseResults) -> MathNode:
        name = self._canonical(s, loc, toks[0])
        spec = self.registry.get(name)
        if spec.output_class == "identifier":
            return Identifier(name=f"\\{name}", unicode_hint=spec.unicode)
        return Operator(symbol=f"\\{name}")

    def _command(self, s: str, loc: int, toks: ParseResults) -> MathNode:
        name = self._canonical(s, loc, toks[0])
        return Command(name=name, args=tuple(toks[1:]))

    def _fence(self, toks: ParseResults) -> MathNode:
        tokens = list(toks)
        body = row_or_single(tokens[2:-2])
        return Row(
            children=(
                Command(name="left", args=(tokens[1],)),
                body,
                Command(name="right", args=(tokens[-1],)),
            )
        )

    def _sqrt(self, toks: ParseResults) -> MathNode:
        tokens = list(toks)
        radicand = tokens[-1]
        if len(tokens) == 3 and isinstance(tokens[1], _RadicalIndex):
            return Command(name="sqrt", args=(radicand, tokens[1].node))
        return Command(name="sqrt", args=(radicand,))

    def _text(self, toks: ParseResults) -> MathNode:
        return Command(name=toks[0][1:], args=(Identifier(name=toks[1][1:-1]),))

    def _chem(self, s: str, loc: int, toks: ParseResults) -> MathNode:
        from mathkg.chem.parser import parse_ce

        body_start = s.index("{", loc + len(toks[0])) + 1
        try:
            return parse_ce(toks[1][1:-1])
        except ChemSyntaxError as e:
            start = body_start + e.offset
            raise GrammarFault(
                s,
                start,
                f"Invalid chemical notation: {e.message}",
                end=start + e.length,
                expected=("mhchem species",),
            ) from e

    def _scripted(self, toks: ParseResults) -> MathNode:
        base, *parts = list(toks)
        if not parts:
            return base
        return Script(base=base, **{p.position: p.node for p in parts})

    def _dangling(self, s: str, loc: int, toks: ParseResults) -> MathNode:
        _warn(
            Diagnostic.at(
                s, loc, loc + 1, "Script without a base", severity="warning", expected=("base",)
            )
        )
        return Script(base=Row(), **{p.position: p.node for p in toks})

    def _double_script(self, s: str, loc: int, toks: ParseResults) -> None:
        kind = "superscript" if toks[0] == "^" else "subscript"
        raise GrammarFault(s, loc, f"Double {kind}; use braces to nest scripts")

    def _unknown_command(self, s: str, loc: int, toks: ParseResults) -> None:
        name = toks[0][1:]
        if name in self.registry or name in self.registry.aliases:
            raise GrammarFault(
                s,
                loc,
                f"{toks[0]} takes arguments; wrap it in braces here",
                end=loc + len(toks[0]),
                expected=("{",),
            )
        raise GrammarFault(
            s,
            loc,
            f"Unsupported command {toks[0]}",
            end=loc + len(toks[0]),
            expected=("supported command",),
        )


@lru_cache(maxsize=32)
def _cached_grammar(
    registry: CommandRegistry, macro_items: tuple[tuple[str, SemanticMacro], ...]
) -> TexvcGrammar:
    return TexvcGrammar(registry, dict(macro_items))


def grammar_for(
    registry: CommandRegistry, macros: Mapping[str, SemanticMacro] | None = None
) -> TexvcGrammar:
    return _cached_grammar(registry, tuple(sorted((macros or {}).items())))
