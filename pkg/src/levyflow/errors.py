"""Exception hierarchy.

Input/configuration problems derive from :class:`InputError` (CLI exit code 2);
numerical failures derive from :class:`ComputationError` (exit code 1).
"""


class LevyflowError(Exception):
    """Base class for all package errors."""


class InputError(LevyflowError, ValueError):
    """Bad input data or configuration."""


class ParseError(InputError):
    """A file could not be parsed."""


class UnknownCountryError(InputError):
    def __init__(self, code, where=""):
        self.code = code
        msg = f"unknown country code {code!r}"
        super().__init__(f"{msg} ({where})" if where else msg)


class NegativeFlowError(InputError):
    def __init__(self, value, row, col, where=""):
        self.value, self.row, self.col = value, row, col
        msg = f"negative flow {value!r} at cell ({row}, {col})"
        super().__init__(f"{msg} in {where}" if where else msg)


class ConfigError(InputError):
    """Inconsistent configuration (remap tables, run config, CLI flags)."""


class RegistryMismatchError(InputError):
    """Two objects that must share a country registry do not."""


class ComputationError(LevyflowError):
    """A numerical procedure could not produce a result."""


class EmptyDistributionError(ComputationError):
    """Total flow is zero, so no distribution can be formed."""


class InsufficientTailError(ComputationError):
    """Too few usable points to the right of the global maximum."""


class InsufficientDataError(ComputationError):
    """Too few points to fit a model."""


class ConvergenceError(ComputationError):
    """The nonlinear solver hit its iteration limit.

    ``best`` holds the best parameters found and ``diagnostics`` the solver state.
    """

    def __init__(self, message, best=None, diagnostics=None):
        super().__init__(message)
        self.best = best
        self.diagnostics = diagnostics or {}
