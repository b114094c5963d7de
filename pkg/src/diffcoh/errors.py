"""Exception hierarchy shared by the library and the CLI.

Mathematical failures (a non-associative product, a non-cocycle, an obstructed
deformation) are reported as verdicts. Exceptions are reserved for bad input,
exhausted budgets and broken internal identities.
"""

from __future__ import annotations


class DiffcohError(Exception):
    """Base class for all diffcoh errors."""


class InvalidInputError(DiffcohError, ValueError):
    """Input data is malformed or violates a precondition.

    Attributes:
        witness: Basis indices at which the problem was detected, if any.
    """

    def __init__(self, message: str, witness: tuple[int, ...] | None = None):
        super().__init__(message)
        self.witness = witness


class ProblemFileError(InvalidInputError):
    """A problem document could not be parsed.

    Attributes:
        location: JSON path of the offending value, e.g. ``$.algebra.mult[0][1]``.
    """

    def __init__(self, message: str, location: str = "$"):
        super().__init__(f"{location}: {message}")
        self.location = location


class BudgetExceededError(DiffcohError):
    """A configured resource budget would be exceeded."""


class UnsupportedOperationError(DiffcohError):
    """The operation is not defined for these arguments."""


class InternalConsistencyError(DiffcohError, RuntimeError):
    """An identity guaranteed by the mathematics failed to hold."""
