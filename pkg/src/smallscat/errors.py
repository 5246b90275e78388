"""Exception types shared across the package."""


class SmallScatError(Exception):
    pass


class SingularKernelError(SmallScatError, ValueError):
    """Free-space kernel evaluated at coincident points."""


class FeasibilityError(SmallScatError, ValueError):
    """Requested potential factorization violates n >= 0 or n <= n_max."""


class PlacementError(SmallScatError, RuntimeError):
    """Density too high for disjoint balls in some cell."""


class SolverError(SmallScatError, RuntimeError):
    """Linear solve failed; carries the residual history when available."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class CapacityError(SmallScatError, RuntimeError):
    """Problem size exceeds the configured dense cap."""


class ResolutionError(SmallScatError, ValueError):
    """Grid spacing does not resolve the wavelength (kh bound)."""


class RegimeError(SmallScatError, ValueError):
    """Parameters outside the supported regime (ka bound, evanescent well)."""


class ConfigError(SmallScatError, ValueError):
    """Invalid experiment configuration."""
