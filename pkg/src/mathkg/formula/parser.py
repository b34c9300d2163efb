import logging
import re
from typing import Mapping

from pydantic import ValidationError
from pyparsing import ParseBaseException

from mathkg.core.exceptions import TexvcSyntaxError
from mathkg.formula.diagnostics import Diagnostic, byte_length
from mathkg.formula.grammar import GrammarFault, collected_warnings, grammar_for
from mathkg.formula.nodes import MathNode, SemanticMacro
from mathkg.formula.registry import CommandRegistry, default_registry

logger = logging.getLogger(__name__)

MAX_INPUT_BYTES = 64 * 1024
MAX_NESTING = 32

_CONTROL_SEQUENCE = re.compile(r"\\(?:[A-Za-z]+|[\s\S])?")
# Characters XML 1.0 cannot represent.
NON_XML_CHAR = re.compile("[\x00-\x08\x0b\x0c\x0e-\x1f\ud800-\udfff\ufffe\uffff]")


def _scan_nesting(text: str) -> Diagnostic | None:
    """Brace balance and nesting depth, checked before the grammar runs."""
    open_braces: list[int] = []
    fences = 0
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            word = _CONTROL_SEQUENCE.match(text, i).group(0)  # type: ignore[union-attr]
            if word == "\\left":
                fences += 1
            elif word == "\\right" and fences:
                fences -= 1
            i += len(word)
            continue
        if ch == "{":
            open_braces.append(i)
            if len(open_braces) + fences > MAX_NESTING:
                return Diagnostic.at(
                    text, i, i + 1, f"Formula nests deeper than {MAX_NESTING} groups"
                )
        elif ch == "}":
            if not open_braces:
                return Diagnostic.at(
                    text, i, i + 1, "Unmatched closing brace", expected=("end of input",)
                )
            open_braces.pop()
        i += 1

    if open_braces:
        start = open_braces[-1]
        return Diagnostic.at(text, start, len(text), "Missing closing brace", expected=("}",))
    return None


def _token_end(text: str, loc: int) -> int:
    if loc >= len(text):
        return len(text)
    if text[loc] == "\\":
        match = _CONTROL_SEQUENCE.match(text, loc)
        return loc + len(match.group(0))  # type: ignore[union-attr]
    return loc + 1


def _from_pyparsing(text: str, exc: ParseBaseException) -> Diagnostic:
    loc = min(max(exc.loc, 0), len(text))
    message = exc.msg or "Syntax error"
    expected: tuple[str, ...] = ()
    if message.startswith("Expected "):
        expected = (message[len("Expected "):].strip("'\""),)
    return Diagnostic.at(text, loc, _token_end(text, loc), message, expected=expected)


def _unique(diagnostics: list[Diagnostic]) -> list[Diagnostic]:
    seen: dict[tuple[int, int, str], Diagnostic] = {}
    for diagnostic in diagnostics:
        seen.setdefault((diagnostic.byte_offset, diagnostic.length, diagnostic.message), diagnostic)
    return sorted(seen.values(), key=lambda d: (d.byte_offset, d.length, d.message))


def parse_with_diagnostics(
    text: str,
    *,
    macros: Mapping[str, SemanticMacro] | None = None,
    registry: CommandRegistry | None = None,
) -> tuple[MathNode | None, list[Diagnostic]]:
    """
    Parses ``text`` and returns the tree (or None) with every diagnostic.

    The error, when there is one, comes first; warnings follow in source order.
    """
    if byte_length(text) > MAX_INPUT_BYTES:
        return None, [
            Diagnostic(
                severity="error",
                byte_offset=0,
                length=0,
                message=f"Formula exceeds {MAX_INPUT_BYTES} bytes",
            )
        ]

    bad_char = NON_XML_CHAR.search(text)
    if bad_char is not None:
        return None, [
            Diagnostic.at(
                text,
                bad_char.start(),
                bad_char.end(),
                f"Character U+{ord(bad_char.group()):04X} is not allowed in a formula",
            )
        ]

    fault = _scan_nesting(text)
    if fault is not None:
        return None, [fault]

    grammar = grammar_for(registry or default_registry(), macros)
    sink: list[Diagnostic] = []
    token = collected_warnings.set(sink)
    error: Diagnostic | None = None
    node: MathNode | None = None
    try:
        node = grammar.parse(text)
    except GrammarFault as exc:
        error = Diagnostic.at(text, exc.loc, exc.end, exc.msg, expected=exc.expected)
    except ParseBaseException as exc:
        error = _from_pyparsing(text, exc)
    except RecursionError:
        error = Diagnostic.at(text, 0, 0, "Formula is nested too deeply")
    except ValidationError as exc:
        logger.error(f"Parse tree rejected for {text!r}: {exc}")
        error = Diagnostic.at(text, 0, 0, "Malformed formula")
    finally:
        collected_warnings.reset(token)

    warnings = _unique(sink)
    if error is not None:
        return None, [error, *warnings]
    return node, warnings


def parse_texvc(
    text: str,
    *,
    macros: Mapping[str, SemanticMacro] | None = None,
    registry: CommandRegistry | None = None,
) -> MathNode | Diagnostic:
    """
    Parses a texvc formula into a MathNode tree.

    Returns the error Diagnostic instead of raising when the input is not in
    the supported language.
    """
    node, diagnostics = parse_with_diagnostics(text, macros=macros, registry=registry)
    if node is None:
        return diagnostics[0]
    return node


def parse_or_raise(
    text: str,
    *,
    macros: Mapping[str, SemanticMacro] | None = None,
    registry: CommandRegistry | None = None,
) -> MathNode:
    result = parse_texvc(text, macros=macros, registry=registry)
    if isinstance(result, Diagnostic):
        raise TexvcSyntaxError(result)
    return result


def validate(
    text: str,
    *,
    macros: Mapping[str, SemanticMacro] | None = None,
    registry: CommandRegistry | None = None,
) -> list[Diagnostic]:
    """
    Author feedback for a formula: empty iff the formula parses.

    A failed parse reports its error followed by any warnings. Warnings for
    a formula that parses are only available from parse_with_diagnostics.
    """
    node, diagnostics = parse_with_diagnostics(text, macros=macros, registry=registry)
    return [] if node is not None else diagnostics
