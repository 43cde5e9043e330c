"""Exception hierarchy used across the package."""

from __future__ import annotations


class VertexBetheError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(VertexBetheError, ValueError):
    """An argument lies outside the region where a formula is valid."""


class PreconditionError(VertexBetheError, ValueError):
    """A documented precondition of an operation does not hold."""


class ConfigError(VertexBetheError, ValueError):
    """Invalid model parameters or run configuration."""


class SeriesError(VertexBetheError, ArithmeticError):
    """A series failed to converge within the allotted number of terms."""

    def __init__(self, message: str, partial_sum=None):
        super().__init__(message)
        self.partial_sum = partial_sum


class DegenerateBasisError(VertexBetheError, ArithmeticError):
    """No well-conditioned set of sample points could be found."""


class SingularGaugeError(VertexBetheError, ArithmeticError):
    """A gauge matrix or weight denominator vanishes."""


class DimensionError(VertexBetheError, ValueError):
    """The Hilbert space would exceed the configured dimension cap."""


class ConvergenceError(VertexBetheError, ArithmeticError):
    """Newton iteration did not converge."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class DegenerateSolutionError(VertexBetheError, ArithmeticError):
    """The Bethe Jacobian became singular, or the roots collapsed onto each other."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class PoleError(VertexBetheError, ArithmeticError):
    """Evaluation at a pole of a meromorphic expression."""


class ConsistencyError(VertexBetheError, ArithmeticError):
    """A numerical consistency condition required by a construction fails."""
