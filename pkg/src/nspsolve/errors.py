"""Exception types shared across the package.

The command line interface maps each type to a fixed exit code, so solver
and model code should raise these rather than bare ValueErrors whenever the
failure is meaningful to a caller.
"""


class ConfigError(ValueError):
    """A parameter combination that the requested operation cannot honor."""


class CapacityError(RuntimeError):
    """The problem exceeds a hard size limit of the chosen algorithm."""


class DimensionError(ValueError):
    """Mismatched lengths or shapes between related arguments."""


class DomainError(ValueError):
    """A value outside the admissible domain (e.g. a spin that is not +-1)."""


class UndefinedStatisticError(ValueError):
    """A statistic was requested on an empty sample collection."""
