"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: ConfigError -> 1, DataError -> 2,
NumericError -> 3.
"""


class GazesimError(Exception):
    """Base class for all package errors."""


class ConfigError(GazesimError):
    """Invalid configuration or parameter values."""


class DataError(GazesimError):
    """Unreadable, malformed or inconsistent input data."""


class NumericError(GazesimError):
    """Numerical failure during simulation (e.g. integrator step underflow)."""
