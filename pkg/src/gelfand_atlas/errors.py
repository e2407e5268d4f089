"""Exception types shared across the package."""


class GelfandError(Exception):
    """Base class for all package errors."""


class DomainError(GelfandError):
    """Evaluation point outside the domain of a profile or closed form."""


class BlowUp(GelfandError):
    """Integration aborted because the state exceeded the overflow guard."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"state exceeded overflow guard at t={t:.6g}")


class LostPositivity(GelfandError):
    """A positivity constraint on the unknown failed along the trajectory."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"positivity constraint violated at t={t:.6g}")


class ToleranceFailure(GelfandError):
    """The adaptive integrator could not meet the requested tolerance."""


class NoConvergence(GelfandError):
    """Newton iteration (or a fixed-point iteration) failed to converge."""

    def __init__(self, message: str = "", log=None):
        self.log = log
        super().__init__(message or "iteration did not converge")


class WrongProblem(GelfandError):
    """An identity or check was applied to a problem family it is not defined for."""


class NoRealRoots(GelfandError):
    """The boundary quadratic has negative discriminant: no admissible values."""


class NoFold(GelfandError):
    """The traced branch contains no sign change of the lambda increment."""


class BeyondFold(GelfandError):
    """A minimal solution was requested at or above the extremal parameter."""


class StepCollapse(GelfandError):
    """Arclength step shrank below its minimum without corrector convergence."""


class NonpositiveFactor(GelfandError):
    """A conformal factor that must be positive is not."""
