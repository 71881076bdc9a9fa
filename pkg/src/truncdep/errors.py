"""Exception hierarchy shared by all truncdep modules."""


class TruncdepError(Exception):
    """Base class for all package-specific errors."""


class DomainError(TruncdepError, ValueError):
    """Input outside the documented domain of an operation."""


class ConvergenceError(TruncdepError, RuntimeError):
    """An iterative routine exhausted its budget without converging."""


class InvariantError(TruncdepError, RuntimeError):
    """A mathematical invariant that must hold on valid inputs failed.

    Raised instead of silently patching the value (e.g. taking an
    absolute value); indicates a bug or numerically hostile inputs.
    """


class DataError(TruncdepError, ValueError):
    """Malformed or inadmissible observation data."""
