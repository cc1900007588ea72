"""Exception types shared across the package."""


class StepOscError(Exception):
    """Base class for all package errors."""


class NoClassicalMotionError(StepOscError, ValueError):
    """Energy is at or below the potential minimum."""


class NoImpactError(StepOscError, ValueError):
    """The level set does not reach the wall."""


class CornerCollisionError(StepOscError):
    """A trajectory hit the concave corner of the step (both walls at once)."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class DomainError(StepOscError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class SizingError(StepOscError, ValueError):
    """A requested grid exceeds the memory budget."""


class ConvergenceError(StepOscError):
    """An iterative solver did not converge.

    The partial results (eigenvalues, vectors, residual norms) are kept on the
    exception so callers can inspect what was obtained.
    """

    def __init__(self, message, eigenvalues=None, eigenvectors=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors
        self.residuals = residuals


class GridMismatchError(StepOscError, ValueError):
    """Fields defined on different grids were combined."""


class IngestionError(StepOscError, ValueError):
    """An input file is malformed or fails its checksum."""


class ConfigError(StepOscError, ValueError):
    """Experiment configuration failed validation."""
