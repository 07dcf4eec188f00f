"""Exception types shared across the simulation pipeline."""


class SimulationError(Exception):
    """Base class for errors raised by the solver and its helpers."""


class DegenerateMatrixError(SimulationError, ValueError):
    """A matrix input violates a positivity/invertibility precondition."""


class SingularMatrixError(DegenerateMatrixError):
    """Determinant magnitude below the configured singularity floor."""


class OutOfDomainError(SimulationError):
    """A particle's interpolation stencil leaves the background grid."""


class BlowUpError(SimulationError):
    """A particle velocity exceeded the stability ceiling (CFL violation)."""


class ConfigError(SimulationError, ValueError):
    """Invalid or inconsistent scene configuration."""
