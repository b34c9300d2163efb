"""Exception hierarchy shared by every mathkg subpackage.

Each domain error also derives from the closest builtin so callers that only
know ``ValueError`` or ``LookupError`` keep working.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from mathkg.formula.diagnostics import Diagnostic


class MathKGError(Exception):
    """Base class for every domain error raised by mathkg."""


# ==========================================
# Configuration and data tables
# ==========================================


class RegistryError(MathKGError, ValueError):
    """A bundled or user supplied data table violates its contract."""


class MacroConfigurationError(RegistryError):
    """A semantic macro table is inconsistent with the command registry."""


# ==========================================
# Formula and chemistry parsing
# ==========================================


class TexvcSyntaxError(MathKGError, ValueError):
    """Raised by callers that need an exception instead of a Diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic


class ChemSyntaxError(MathKGError, ValueError):
    def __init__(self, message: str, offset: int = 0, length: int = 0):
        super().__init__(message)
        self.message = message
        self.offset = offset
        self.length = length


class UnresolvedConceptError(MathKGError, LookupError):
    """A semantic macro has neither a resolved item nor a fallback URL."""


# ==========================================
# Knowledge graph store
# ==========================================


class StoreError(MathKGError):
    pass


class UnknownEntityError(StoreError, LookupError):
    pass


class LabelCollisionError(StoreError, ValueError):
    pass


class DatatypeMismatchError(StoreError, ValueError):
    pass


class InvalidFormulaError(StoreError, ValueError):
    def __init__(self, texvc: str, diagnostic: Diagnostic):
        super().__init__(f"Invalid formula {texvc!r}: {diagnostic.message}")
        self.diagnostic = diagnostic


class ExternalIdError(StoreError, ValueError):
    """Unregistered identifier type or value failing its pattern."""


class DuplicateExternalIdError(StoreError, ValueError):
    pass


class MappingConflictError(StoreError, ValueError):
    pass


class CompletenessDowngradeError(StoreError, ValueError):
    pass


# ==========================================
# Import, query, search
# ==========================================


class ImportFailure(MathKGError):
    pass


class FetchError(ImportFailure, LookupError):
    pass


class RecordParseError(ImportFailure, ValueError):
    def __init__(self, message: str, record_ref: str | None = None):
        super().__init__(message)
        self.record_ref = record_ref


class QueryError(MathKGError, ValueError):
    pass


class FormulaIndexError(MathKGError, ValueError):
    pass
