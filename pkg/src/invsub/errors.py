"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class InvsubError(Exception):
    """Base class for all errors raised by :mod:`invsub`."""


class PoleError(InvsubError):
    """A Gamma function argument hit a pole (nonpositive integer)."""


class DomainError(InvsubError, ValueError):
    """An argument is outside the domain where an operation is defined."""


class ConvergenceError(InvsubError):
    """A series or adaptive scheme failed to meet its truncation criterion."""


class UnsupportedTermError(InvsubError):
    """A term falls outside the closed function family of an operation."""


class RecipOnNonConstant(InvsubError):
    """A reciprocal was applied to an operand that is not constant in x."""

    def __init__(self, message: str, operand: object = None) -> None:
        super().__init__(message)
        self.operand = operand


class DivisionBySymbolicZero(InvsubError, ZeroDivisionError):
    """A reciprocal operand reduced to the zero polynomial."""


class NotInvariantError(InvsubError):
    """A reduction was requested for a basis that is not invariant."""

    def __init__(self, message: str, offending_keys: tuple = ()) -> None:
        super().__init__(message)
        self.offending_keys = offending_keys


class NotInBasisError(InvsubError):
    """An initial condition has components outside the basis."""

    def __init__(self, message: str, offending_keys: tuple = ()) -> None:
        super().__init__(message)
        self.offending_keys = offending_keys


class UnsupportedSystemError(InvsubError):
    """No closed-form strategy matches an equation of a reduced system."""

    def __init__(self, message: str, component: int | None = None) -> None:
        super().__init__(message)
        self.component = component


class NoRealSolutionError(InvsubError):
    """A power-law ansatz has no real amplitude."""


class CommensurabilityError(InvsubError):
    """Time-derivative orders do not share a rational common step."""


class DenominatorBlowupError(InvsubError):
    """A rational right-hand side lost its denominator along a trajectory."""

    def __init__(self, message: str, time: float) -> None:
        super().__init__(message)
        self.time = time
