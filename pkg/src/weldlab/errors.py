"""Exception types shared across the package.

Two failure families matter to callers: bad inputs (rejected before any
computation) and numerical breakdowns (iteration caps, loss of positive
definiteness, coefficient growth outside the analyticity domain). The CLI
maps them to distinct exit codes.
"""


class WeldLabError(Exception):
    """Base class for all package errors."""


class InvalidInput(WeldLabError, ValueError):
    """Input rejected: wrong kind, domain violation, parameter out of range."""


class NumericalFailure(WeldLabError, RuntimeError):
    """Computation failed: non-convergence, non-positive-definite matrix,
    coefficient growth signalling evaluation outside the analyticity domain."""
