"""Higher-spin eight-vertex model: Sklyanin representations, algebraic Bethe Ansatz
and the thermodynamics of the spin-l chain."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DegenerateBasisError,
    DegenerateSolutionError,
    DimensionError,
    DomainError,
    PoleError,
    PreconditionError,
    SeriesError,
    SingularGaugeError,
    VertexBetheError,
)
from .sklyanin import ModelParams  # noqa: E402
from .sos import GaugeParams  # noqa: E402

__all__ = [
    "ConfigError",
    "ConsistencyError",
    "ConvergenceError",
    "DegenerateBasisError",
    "DegenerateSolutionError",
    "DimensionError",
    "DomainError",
    "GaugeParams",
    "ModelParams",
    "PoleError",
    "PreconditionError",
    "SeriesError",
    "SingularGaugeError",
    "VertexBetheError",
    "__version__",
]
