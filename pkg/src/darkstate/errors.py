"""Exception and warning types shared across the package."""


class DarkstateError(Exception):
    """Base class for all errors raised by this package."""


class NonPositiveRate(DarkstateError):
    """A decay rate or level splitting that must be positive is not."""


class UnnormalizedInitialState(DarkstateError):
    """Initial amplitude vector does not have unit norm."""


class AlignmentOutOfRange(DarkstateError):
    """A dipole alignment factor lies outside [-1, 1]."""


class UnknownPreset(DarkstateError):
    """Requested preset name is not in the registry."""


class NotAnalyticAdmissible(DarkstateError):
    """System violates the preconditions of the closed-form spectrum path
    (resonant drives, equal splittings, zero cross-damping)."""


class StepSizeUnderflow(DarkstateError):
    """The adaptive integrator failed before reaching t_final."""

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class NotConverged(DarkstateError):
    """No plateau found in the surviving population."""

    def __init__(self, message, window_means=None):
        super().__init__(message)
        self.window_means = window_means


class PoleHit(DarkstateError):
    """Requested detuning coincides with a pole of the amplitude."""


class SingularSystem(DarkstateError):
    """The Laplace-domain linear system is singular at the requested detuning."""


class DivisionByZeroDrive(DarkstateError):
    """Drive-completion request with a vanishing drive in the denominator."""


class GridMismatch(DarkstateError):
    """Two spectra do not share the same detuning grid."""


class GridTooNarrow(DarkstateError):
    """Grid edges carry non-negligible intensity; the integral is unreliable."""


class GridTooCoarse(UserWarning):
    """Grid spacing may be too coarse to resolve the narrowest feature."""
