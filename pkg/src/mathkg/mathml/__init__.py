from mathkg.mathml.emitter import (
    MATHML_NS,
    VOCABULARY,
    EmitOptions,
    emit_fragment,
    emit_mathml,
    mathml_violations,
)
from mathkg.mathml.macros import (
    MacroEntry,
    MacroTable,
    default_macro_table,
    desugar,
    expand_semantics,
    extract_concepts,
    load_macro_table,
)

__all__ = [
    "MATHML_NS",
    "VOCABULARY",
    "EmitOptions",
    "MacroEntry",
    "MacroTable",
    "default_macro_table",
    "desugar",
    "emit_fragment",
    "emit_mathml",
    "expand_semantics",
    "extract_concepts",
    "load_macro_table",
    "mathml_violations",
]
