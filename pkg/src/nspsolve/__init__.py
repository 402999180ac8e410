"""Nurse-schedule QUBO construction, solvers and evaluation tools."""

from .errors import (
    CapacityError,
    ConfigError,
    DimensionError,
    DomainError,
    UndefinedStatisticError,
)
from .qubo import (
    IsingProblem,
    QuboProblem,
    energy_ising,
    energy_qubo,
    hamming_distance,
    qubo_to_ising,
)

__version__ = "0.1.0"
