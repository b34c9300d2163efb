"""
Tokenizer for the supported mhchem subset.

The equation is split on whitespace into words; operator words (``+``, ``->``,
``<=>``) are recognised directly and every other word is a species parsed with
a small pyparsing grammar::

    species   :: coefficient? unit+ charge? state?
    unit      :: element count? | '(' unit+ ')' count?
    charge    :: '^' ( '{' digits? sign '}' | digits? sign ) | sign
"""

import re
from functools import lru_cache
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field
from pyparsing import (
    Forward,
    OneOrMore,
    Optional,
    ParseBaseException,
    ParserElement,
    Regex,
    Suppress,
)

from mathkg.core.exceptions import ChemSyntaxError

ARROWS = {"->": "forward", "<=>": "equilibrium"}


class _Token(BaseModel):
    model_config = ConfigDict(frozen=True)

    offset: int = 0


class ElementSymbol(_Token):
    type: Literal["element"] = "element"
    symbol: str = Field(pattern=r"^[A-Z][a-z]?$")


class StoichiometricCoefficient(_Token):
    type: Literal["coefficient"] = "coefficient"
    value: str = Field(pattern=r"^[0-9]+$")


class ChargeSign(_Token):
    type: Literal["charge"] = "charge"
    sign: Literal["+", "-"]
    magnitude: str = Field(default="", pattern=r"^[0-9]*$")


class Arrow(_Token):
    type: Literal["arrow"] = "arrow"
    kind: Literal["forward", "equilibrium"]


class StateAnnotation(_Token):
    type: Literal["state"] = "state"
    state: Literal["s", "l", "g", "aq"]


class Subscript(_Token):
    type: Literal["subscript"] = "subscript"
    digits: str = Field(pattern=r"^[0-9]+$")


class Plus(_Token):
    type: Literal["plus"] = "plus"


class GroupOpen(_Token):
    type: Literal["group_open"] = "group_open"


class GroupClose(_Token):
    type: Literal["group_close"] = "group_close"


CeToken = Annotated[
    Union[
        ElementSymbol,
        StoichiometricCoefficient,
        ChargeSign,
        Arrow,
        StateAnnotation,
        Subscript,
        Plus,
        GroupOpen,
        GroupClose,
    ],
    Field(discriminator="type"),
]

_STATE_WORD = re.compile(r"^\((s|l|g|aq)\)$")
_DIGITS = re.compile(r"^[0-9]+$")


@lru_cache(maxsize=1)
def _species_grammar() -> ParserElement:
    element = Regex(r"[A-Z][a-z]?").set_name("element symbol")
    element.set_parse_action(lambda s, loc, t: ElementSymbol(symbol=t[0], offset=loc))
    count = Regex(r"[0-9]+").set_parse_action(
        lambda s, loc, t: Subscript(digits=t[0], offset=loc)
    )
    coefficient = Regex(r"[0-9]+(?=[A-Z(])").set_parse_action(
        lambda s, loc, t: StoichiometricCoefficient(value=t[0], offset=loc)
    )
    open_paren = Regex(r"\((?=[A-Z(])").set_parse_action(lambda s, loc, t: GroupOpen(offset=loc))
    close_paren = Regex(r"\)").set_parse_action(lambda s, loc, t: GroupClose(offset=loc))

    unit = Forward()
    unit <<= (element + Optional(count)) | (
        open_paren + OneOrMore(unit) + close_paren + Optional(count)
    )

    def _charge(s, loc, t):
        magnitude, sign = t[0], t[1]
        return ChargeSign(sign=sign, magnitude=magnitude, offset=loc)

    signed = Regex(r"[0-9]*") + Regex(r"[+-]")
    charge = (
        Suppress("^") + ((Suppress("{") + signed + Suppress("}")) | signed)
    ).set_parse_action(_charge) | Regex(r"[+-]").set_parse_action(
        lambda s, loc, t: ChargeSign(sign=t[0], offset=loc)
    )
    state = Regex(r"\((?:s|l|g|aq)\)").set_parse_action(
        lambda s, loc, t: StateAnnotation(state=t[0][1:-1], offset=loc)
    )

    species = Optional(coefficient) + OneOrMore(unit) + Optional(charge) + Optional(state)
    return species.streamline()


def _check_parentheses(word: str, start: int) -> None:
    depth_stack: list[int] = []
    for i, ch in enumerate(word):
        if ch == "(":
            depth_stack.append(i)
        elif ch == ")":
            if not depth_stack:
                raise ChemSyntaxError("Unbalanced parentheses", start + i, 1)
            depth_stack.pop()
    if depth_stack:
        i = depth_stack[-1]
        raise ChemSyntaxError("Unbalanced parentheses", start + i, len(word) - i)


def _species_tokens(word: str, start: int) -> list[_Token]:
    _check_parentheses(word, start)
    try:
        tokens = _species_grammar().parse_string(word, parse_all=True)
    except ParseBaseException as e:
        loc = min(e.loc, len(word) - 1)
        raise ChemSyntaxError(
            f"Malformed element symbol in {word!r}", start + loc, len(word) - loc
        ) from None
    return [tok.model_copy(update={"offset": tok.offset + start}) for tok in tokens]


def tokenize_ce(text: str) -> list[_Token]:
    """
    Splits an mhchem equation into CeTokens.

    Raises:
        ChemSyntaxError: On empty input, malformed element symbols,
            unbalanced parentheses or unsupported arrows. Offsets are
            character offsets into ``text``.
    """
    words = list(re.finditer(r"\S+", text))
    if not words:
        raise ChemSyntaxError("Empty chemical equation", 0, len(text))

    tokens: list[_Token] = []
    for match in words:
        word, start = match.group(0), match.start()
        if word == "+":
            tokens.append(Plus(offset=start))
        elif word in ARROWS:
            tokens.append(Arrow(kind=ARROWS[word], offset=start))
        elif _DIGITS.match(word):
            tokens.append(StoichiometricCoefficient(value=word, offset=start))
        elif _STATE_WORD.match(word):
            tokens.append(StateAnnotation(state=word[1:-1], offset=start))
        elif set(word) <= set("<=->"):
            raise ChemSyntaxError(f"Unsupported arrow {word!r}", start, len(word))
        else:
            tokens.extend(_species_tokens(word, start))
    return tokens
