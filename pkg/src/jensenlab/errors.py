"""Shared exception types."""


class JensenLabError(Exception):
    """Base class for errors raised by this package."""


class KernelError(JensenLabError, ValueError):
    """Invalid kernel request or a kernel failing its hypotheses."""


class GridError(JensenLabError, ValueError):
    """Invalid grid geometry or a violated padding contract."""


class ResolutionError(JensenLabError, ValueError):
    """Kernel under-resolved by the grid spacing."""


class SizeCapError(JensenLabError, ValueError):
    """Brute-force computation refused above the configured size cap."""


class NumericsError(JensenLabError, RuntimeError):
    """Numerical failure: non-convergence or non-finite values."""


class ProjectionError(NumericsError):
    """Dykstra projection failed to converge within the iteration cap."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}
