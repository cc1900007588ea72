"""Classical and quantum analysis of the two-dimensional step oscillator."""
from .potentials import PotentialSpec, StepRegion

__version__ = "0.1.0"
__all__ = ["PotentialSpec", "StepRegion", "__version__"]
