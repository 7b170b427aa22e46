"""Exception hierarchy shared by every module.

Each class carries an ``exit_code`` used by the command line front end:
1 for a failed verification, 2 for bad input, 3 for an internal degeneracy
(a generic solve or a sample point that could not be used).
"""

from __future__ import annotations

from typing import Any


class MultDiracError(Exception):
    exit_code = 3

    def __init__(self, message: str = "", **details: Any) -> None:
        super().__init__(message)
        self.details = details


class InputError(MultDiracError):
    exit_code = 2


class VerificationError(MultDiracError):
    exit_code = 1


class DegeneracyError(MultDiracError):
    exit_code = 3


# expression layer ---------------------------------------------------------


class ExpressionSyntaxError(InputError):
    """Raised by the parser; ``position`` is a 0-based character offset."""

    def __init__(self, position: int, expected: str, text: str = "") -> None:
        super().__init__(f"syntax error at position {position}: expected {expected}")
        self.position = position
        self.expected = expected
        self.text = text


class UnknownVariable(InputError):
    def __init__(self, name: str) -> None:
        super().__init__(f"unknown variable {name!r}")
        self.name = name


class DivisionByZeroPolynomial(InputError):
    pass


class IdenticallyZeroDenominator(DegeneracyError):
    pass


class PoleAtPoint(DegeneracyError):
    pass


# geometry -----------------------------------------------------------------


class ChartMismatch(InputError):
    pass


class DegreeOverflow(InputError):
    pass


class DegreeUnderflow(InputError):
    pass


# linear algebra / pointwise ----------------------------------------------


class RankDeficientAtPoint(DegeneracyError):
    pass


class SingularSystem(DegeneracyError):
    pass


class GenericSolveFailed(DegeneracyError):
    pass


class RankDrop(DegeneracyError):
    pass


# Dirac / groupoid ---------------------------------------------------------


class NotLagrangian(VerificationError):
    pass


class AxiomViolation(VerificationError):
    pass


class MultiplicativityViolation(VerificationError):
    pass


class NotComposableTangent(InputError):
    pass


class NotComposableCovector(InputError):
    pass


class NonInvertibleBisection(InputError):
    pass


class WrongKernel(InputError):
    pass


class HypothesisFailed(VerificationError):
    pass


class WellDefinednessViolation(VerificationError):
    pass


class FamilyMismatch(InputError):
    pass


class NoLift(VerificationError):
    pass


# command line ------------------------------------------------------------


class SchemaError(InputError):
    pass


class UnknownCommand(InputError):
    pass
