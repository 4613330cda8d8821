"""Exception hierarchy shared by all ddlasso modules."""

import numpy as np


class DDLassoError(Exception):
    """Base class for every error raised by this package."""


class ArgumentError(DDLassoError, ValueError):
    pass


class DimensionError(ArgumentError):
    pass


class HypothesisError(ArgumentError):
    """Input violates a hypothesis a certificate relies on (e.g. m >= n)."""


class ParseError(ArgumentError):
    pass


class SingularMatrixError(DDLassoError, np.linalg.LinAlgError):
    pass


class CostGuardError(DDLassoError, RuntimeError):
    """Exhaustive enumeration would exceed the configured size limit."""


class CycleGuardError(DDLassoError, RuntimeError):
    pass


class OracleError(DDLassoError, RuntimeError):
    pass


class OutOfRangeError(ArgumentError):
    pass
