from mathkg.chem.parser import parse_ce, to_mhchem
from mathkg.chem.suite import CeCase, ce_test_suite, load_ce_suite
from mathkg.chem.tokens import (
    Arrow,
    CeToken,
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

__all__ = [
    "Arrow",
    "CeCase",
    "CeToken",
    "ChargeSign",
    "ElementSymbol",
    "GroupClose",
    "GroupOpen",
    "Plus",
    "StateAnnotation",
    "StoichiometricCoefficient",
    "Subscript",
    "ce_test_suite",
    "load_ce_suite",
    "parse_ce",
    "tokenize_ce",
    "to_mhchem",
]
