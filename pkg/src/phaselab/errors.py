"""Exception hierarchy shared by every phaselab module."""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

DEFAULT_BUDGET = 10**7


def default_budget() -> int:
    """Search budget in nodes; ``PHASELAB_BUDGET`` overrides the default."""
    raw = os.environ.get("PHASELAB_BUDGET")
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise InputError(f"PHASELAB_BUDGET must be an integer, got {raw!r}") from None
        if value <= 0:
            raise InputError("PHASELAB_BUDGET must be positive")
        return value
    return DEFAULT_BUDGET


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1:
            raise ValueError("line and column are 1-based")

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


class PhaseError(Exception):
    """Base class. ``span`` is set when the error can be traced to DSL source."""

    def __init__(self, message: str, *, span: Optional[SourceSpan] = None, detail=None):
        super().__init__(message)
        self.message = message
        self.span = span
        self.detail = detail

    def __str__(self) -> str:
        if self.span is not None:
            return f"{type(self).__name__} at {self.span}: {self.message}"
        return f"{type(self).__name__}: {self.message}"


class InputError(PhaseError):
    pass


# -- validation ---------------------------------------------------------------

class ValidationError(InputError):
    """Raised by ``validate``; ``violations`` holds every problem found."""

    def __init__(self, message: str, *, violations=(), span=None, detail=None):
        super().__init__(message, span=span, detail=detail)
        self.violations = list(violations)


class TotalityError(ValidationError):
    pass


class MonotonicityError(ValidationError):
    pass


class UnknownIdentifier(ValidationError):
    pass


class DuplicateIdentifier(ValidationError):
    pass


class OrderError(ValidationError):
    """An order block that mixes defect levels or breaks operation monotonicity."""


class InducedMonotonicityError(ValidationError):
    """A quotient whose classwise-minimum defect violates monotonicity."""


# -- parsing --------------------------------------------------------------------

class ParseError(InputError):
    pass


class DuplicateDefect(ParseError):
    pass


class DuplicateTuple(ParseError):
    pass


class MissingTuple(ParseError, TotalityError):
    pass


# -- everything else ------------------------------------------------------------

class SizeLimitExceeded(InputError):
    pass


class SignatureMismatch(InputError):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


class InvalidPermutation(InputError):
    pass


class NotACongruence(InputError):
    pass


class OrderMissing(InputError):
    pass


class UnknownTheorem(InputError):
    pass


class BudgetExceeded(PhaseError):
    pass


class RejectionBudgetExceeded(BudgetExceeded):
    pass
