"""Exception hierarchy shared across the package.

Everything derives from LogPeriodicError so callers can catch broadly;
the CLI maps the subclasses onto distinct exit codes.
"""


class LogPeriodicError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(LogPeriodicError, ValueError):
    """Invalid input data or configuration (bad CSV, malformed window, ...)."""


class DomainError(LogPeriodicError, ValueError):
    """Evaluation outside the mathematical domain (e.g. t >= tc)."""


class DegenerateBasisError(LogPeriodicError):
    """The 4x4 normal system of the linear subproblem is numerically singular."""


class FitFailedError(LogPeriodicError):
    """No admissible candidate was found during the nonlinear search."""


class InsufficientHistoryError(ValidationError):
    """An endpoint does not have enough prior observations for the window scheme."""
