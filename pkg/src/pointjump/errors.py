"""Typed failure modes, one class per distinct way a computation can refuse.

Exit-code policy for the CLI: configuration problems exit 2, numerical
failures exit 3, acceptance-check failures exit 4.
"""

from __future__ import annotations


class PointJumpError(Exception):
    """Base class; everything raised on purpose derives from this."""

    exit_code = 3


class ConfigError(PointJumpError):
    exit_code = 2


# --- profile / potential construction -------------------------------------

class UnknownProfile(ConfigError):
    pass


class AdmissibilityViolation(PointJumpError):
    """A smoothing profile failed one of its structural requirements.

    Carries which condition failed and at which argument.
    """

    def __init__(self, condition: str, at: float | None = None):
        self.condition = condition
        self.at = at
        loc = "" if at is None else f" at t={at:g}"
        super().__init__(f"inadmissible profile: {condition}{loc}")


class DomainError(PointJumpError):
    pass


# --- connection-matrix algebra ---------------------------------------------

class NotUnimodular(PointJumpError):
    pass


class WallVariant(PointJumpError):
    """Operation needs a matrix connection but got a separated wall."""


# --- ODE solving and jump extraction ---------------------------------------

class StepSizeUnderflow(PointJumpError):
    pass


class RescaleImpossible(PointJumpError):
    """The solution vanishes at the normalization point (wavenumber node)."""


class NoFreeRegion(PointJumpError):
    pass


class IllConditionedFit(PointJumpError):
    pass


class SingularCoefficient(PointJumpError):
    """The leading ODE coefficient crosses zero on the integration range."""


class QuadratureFailure(PointJumpError):
    pass


class GridTooCoarse(PointJumpError):
    pass


class ExtrapolationUnstable(PointJumpError):
    pass


class ResonantBox(PointJumpError):
    """sin(k·x0) = 0: the boundary-value normalization is degenerate."""


# --- many-body --------------------------------------------------------------

class DegenerateDenominator(PointJumpError):
    def __init__(self, lam: float, mu: float, nu: float):
        self.triple = (lam, mu, nu)
        super().__init__(
            f"vanishing energy denominator with nonzero numerator at "
            f"(lam={lam:g}, mu={mu:g}, nu={nu:g})"
        )


class DimensionTooLarge(ConfigError):
    pass


class NoConvergence(PointJumpError):
    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations "
            f"(last residual {residual:.3e})"
        )


class FitPoor(PointJumpError):
    pass


class AcceptanceFailure(PointJumpError):
    exit_code = 4
