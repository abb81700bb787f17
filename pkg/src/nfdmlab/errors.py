"""Exception types shared across the package."""


class NfdmlabError(Exception):
    """Base class for all package errors."""


class InvalidConfigurationError(NfdmlabError, ValueError):
    """A parameter or combination of parameters is outside its valid range."""


class UnitsMismatchError(NfdmlabError, ValueError):
    """Operation applied to a signal in the wrong units mode."""


class StepPolicyError(NfdmlabError, ValueError):
    """Split-step policy would produce an inaccurate integration."""


class UnrecoverableSpectrumError(NfdmlabError, RuntimeError):
    """Every point of a nonlinear spectrum was flagged as unstable."""


class SynthesisAccuracyError(NfdmlabError, RuntimeError):
    """Backward NFT failed its round-trip tolerance (spectrum likely carries
    discrete eigenvalues)."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual
