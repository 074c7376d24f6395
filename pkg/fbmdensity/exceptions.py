"""Domain errors raised by fbmdensity."""
import numpy as np


class FactorizationError(np.linalg.LinAlgError):
    """Gram matrix could not be factorized, even with the largest jitter."""


class CapabilityError(NotImplementedError):
    """The request is outside the numerical support of a solver."""


class EllipticityError(ValueError):
    """Vector fields fail the uniform ellipticity certificate."""


class ConfigError(ValueError):
    """Experiment configuration is missing a key or carries a bad value."""
