"""Exception hierarchy shared across the package.

Fit failures (everything a Monte Carlo loop should catch and count) derive
from FitError; input and construction problems derive from the other
branches so callers can map them to distinct exit codes.
"""

from __future__ import annotations


class PairRankError(Exception):
    """Base class for every error raised by this package."""


class LinkValidationError(PairRankError):
    """A link kernel failed validation or an unknown link name was requested."""


class DataValidationError(PairRankError):
    """Comparison matrices violate their structural invariants."""


class IngestError(PairRankError):
    """A games or grouping file could not be parsed.

    Carries the 1-based line number when the problem is tied to a row.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FitError(PairRankError):
    """Base class for estimation failures."""


class NotConnectedError(FitError):
    """The undirected comparison graph is disconnected; merits are not identified."""


class DivergedError(FitError):
    """Newton iteration left the trust region or hit the iteration cap."""


class SingularJacobianError(FitError):
    """The free-block Jacobian is not positive definite."""


class ZeroDiagonalError(PairRankError):
    """A diagonal Jacobian entry is zero, so the sparse inverse proxy is undefined."""
