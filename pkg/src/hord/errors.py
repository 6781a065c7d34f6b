"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class HordError(Exception):
    """Base class for all errors raised by :mod:`hord`."""


class CapacityError(HordError):
    """A request would exceed the configured memory budget."""


class OutOfRangeError(HordError, IndexError):
    pass


class ParseError(HordError, ValueError):
    pass


class InvariantViolation(HordError):
    """A coefficient table breaks a structural identity.

    ``witness`` holds the offending index tuple, e.g. ``(2, 3)`` for a
    multiplicativity failure or ``(p, l)`` for a recurrence failure.
    """

    def __init__(self, message: str, witness: tuple = ()):
        super().__init__(message)
        self.witness = witness


class MultiplicativityViolation(InvariantViolation):
    pass


class RecurrenceViolation(InvariantViolation):
    pass


class DeligneViolation(InvariantViolation):
    pass


class NormalizationViolation(InvariantViolation):
    pass


class CoverageError(HordError):
    """A coefficient is needed at an index (or prime) the table does not reach."""


class ZeroCoefficientError(HordError, ValueError):
    pass


class ExhaustionError(HordError):
    """A bounded search ran out of candidates."""


class ExponentCapError(ExhaustionError):
    def __init__(self, message: str, best_ratio: float, best_exponent: int):
        super().__init__(message)
        self.best_ratio = best_ratio
        self.best_exponent = best_exponent


class InvalidSystemError(HordError, ValueError):
    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class FactorizationTimeout(HordError):
    def __init__(self, n: int, partial: list[int] | None = None):
        super().__init__(f"could not factor {n} within the restart budget")
        self.n = n
        self.partial = partial or []


class ChecksumError(HordError):
    pass


class UnsupportedWeightError(HordError, ValueError):
    pass
