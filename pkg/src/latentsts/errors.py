"""Exception hierarchy for latentsts.

All package errors derive from :class:`LatentSTSError` so callers can catch
one base class.  The subclasses mirror the failure surfaces of the pipeline:
domain violations, invalid model specifications, rank-deficient designs,
fitting non-convergence, Monte Carlo study failures, and CLI/config/data
problems.
"""

from __future__ import annotations


class LatentSTSError(Exception):
    """Base class for all latentsts errors."""


class DomainError(LatentSTSError, ValueError):
    """A value left the mean space or support of its model family."""


class SpecificationError(LatentSTSError, ValueError):
    """Invalid parameter values or incompatible family/distribution choices."""


class RankError(LatentSTSError, ValueError):
    """Design matrix is numerically rank deficient."""


class FitConvergenceError(LatentSTSError, RuntimeError):
    """Fisher scoring failed to converge.

    Carries the last iterate in ``result`` so callers can inspect it.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class StudyError(LatentSTSError, RuntimeError):
    """A Monte Carlo replica exhausted its redraw budget."""

    def __init__(self, message, replica=None, diagnostics=None):
        super().__init__(message)
        self.replica = replica
        self.diagnostics = diagnostics


class ConfigError(LatentSTSError, ValueError):
    """Run configuration failed schema validation."""


class DataError(LatentSTSError, ValueError):
    """Problem loading or validating a data set."""
