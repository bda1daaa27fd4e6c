"""Exception types shared across the package."""


class DickeSqueezeError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(DickeSqueezeError):
    """Operands live on Hilbert spaces of incompatible dimension."""


class HermiticityError(DickeSqueezeError):
    """A matrix flagged hermitian fails the hermiticity check."""


class StaleStateError(DickeSqueezeError):
    """A state vector is no longer normalized within tolerance."""


class UnsupportedFourierOrderError(DickeSqueezeError):
    """Closed forms exist only for Fourier components n in {-1, 0, 1}."""


class InstabilityError(DickeSqueezeError):
    """Parameter reduction landed in the unstable regime (negative detuning)."""


class ParameterError(DickeSqueezeError):
    """A parameter fails its validity constraint."""


class NormDriftError(DickeSqueezeError):
    """Time evolution lost unitarity beyond tolerance.

    Carries a diagnostics payload: the step index, the time and the norm at
    the point of failure.
    """

    def __init__(self, step, time, norm, tol):
        self.step = step
        self.time = time
        self.norm = norm
        self.tol = tol
        super().__init__(
            f"norm drifted to {norm:.12g} at step {step} (t = {time:.6g}); "
            f"|norm - 1| exceeds {tol:g}"
        )


class UndefinedSpinDirectionError(DickeSqueezeError):
    """Mean spin length too small to define a squeezing direction."""


class RegimeError(DickeSqueezeError):
    """Analytic formula evaluated outside its regime of validity."""


class ConfigError(DickeSqueezeError):
    """Invalid or inconsistent run configuration."""
