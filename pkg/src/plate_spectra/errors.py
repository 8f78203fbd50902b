"""Exception types raised by the solvers."""

from __future__ import annotations


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class IntegrationError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, estimate: float, abserr: float):
        super().__init__(f"{message} (estimate={estimate!r}, abserr={abserr!r})")
        self.estimate = estimate
        self.abserr = abserr


class PrecisionFloorError(ArithmeticError):
    """A signed sum cancelled below the working-precision floor."""

    def __init__(self, message: str, log_bound):
        super().__init__(f"{message} (log magnitude bound={float(log_bound):.6g})")
        self.log_bound = log_bound


class BracketError(RuntimeError):
    """A root or minimum could not be bracketed."""


class TruncationError(ValueError):
    """A series truncation order is too small for the requested accuracy."""

    def __init__(self, message: str, required: int):
        super().__init__(f"{message}; need at least {required} terms")
        self.required = required


class PSDViolation(ValueError):
    """An eigenvalue of a positive semidefinite operator came out negative."""


class DegenerateMinimumError(BracketError):
    """The dispersion minimum has non-positive curvature."""
