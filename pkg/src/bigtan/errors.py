"""Exception hierarchy shared by every layer of the package."""


class BigTanError(Exception):
    """Base class for all package errors."""


class ArgumentError(BigTanError, ValueError):
    """An argument is out of range or structurally incompatible."""


class SingularityError(BigTanError, ArithmeticError):
    """An operation hit a point where the function is not smooth."""


class ZeroSectionError(SingularityError):
    """A fiber vector or covector vanishes; the zero sections are excluded."""


class DegenerateMetricError(SingularityError):
    """A fundamental tensor is singular or not positive definite."""


class SolverError(BigTanError, RuntimeError):
    """The Legendre Newton solve did not converge."""


class ConfigError(BigTanError, ValueError):
    """Invalid run configuration."""
