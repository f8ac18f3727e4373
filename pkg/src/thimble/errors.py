class ThimbleError(Exception):
    """Base class for every error raised by the thimble package."""


class ConfigError(ThimbleError):
    """Invalid run configuration or invalid input parameters."""


class NumericalError(ThimbleError):
    """Base class for failures of a numerical procedure."""


class DivergenceError(NumericalError):
    """A quantity is evaluated at a logarithmic or algebraic singularity."""


class PoleError(NumericalError):
    """The argument lies within tolerance of a pole.

    Attributes:
        value: the (finite but huge) value computed at the argument.
        residue_direction: unit complex number giving the direction in which
            the value blows up.
    """

    def __init__(self, message, value=None, residue_direction=None):
        super().__init__(message)
        self.value = value
        self.residue_direction = residue_direction


class NonConvergenceError(NumericalError):
    """An iteration stopped without meeting its tolerance."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class LabelExcludedError(NumericalError):
    """No classical solution on the correct branch sheet for a label."""


class CausticError(NumericalError):
    """Harmonic oscillator evaluated within the caustic window T = n*pi."""


class FlowInstabilityError(NumericalError):
    """Re I increased along a downward flow (or decreased along an upward one)."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class QuadratureError(NumericalError):
    """Adaptive quadrature did not meet its tolerance."""

    def __init__(self, message, segments=None):
        super().__init__(message)
        self.segments = list(segments) if segments is not None else []


class BranchCutWarning(UserWarning):
    pass


class RegimeWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass


class StokesDegeneracyWarning(UserWarning):
    pass
