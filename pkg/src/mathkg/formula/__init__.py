from mathkg.formula.diagnostics import Diagnostic
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
from mathkg.formula.normalize import canonical_form, normalize
from mathkg.formula.parser import parse_or_raise, parse_texvc, parse_with_diagnostics, validate
from mathkg.formula.printer import to_texvc
from mathkg.formula.registry import CommandRegistry, default_registry, supported_commands

__all__ = [
    "ChemEquation",
    "Command",
    "CommandRegistry",
    "Diagnostic",
    "Identifier",
    "MathNode",
    "Number",
    "Operator",
    "Row",
    "Script",
    "SemanticMacro",
    "canonical_form",
    "default_registry",
    "normalize",
    "parse_or_raise",
    "parse_texvc",
    "parse_with_diagnostics",
    "supported_commands",
    "to_texvc",
    "validate",
]
