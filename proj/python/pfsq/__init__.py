"""Parallel and serial queue arrays as open queueing networks."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConvergenceError,
    Error,
    InfeasibleError,
    ParseError,
    SaturationError,
    SimulationError,
    ValidationError,
)

__version__ = "0.1.0"
