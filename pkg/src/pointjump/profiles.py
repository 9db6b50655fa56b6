"""Smoothing profiles and the regularized point-interaction potentials.

A profile is an odd smooth step sigma(t) rising to ±1, used at scale a via
sigma_a(x) = sigma(x/a). Three admissible profiles ship: `tanh`, `algebraic`
(t/sqrt(1+t²)) and `smoothstep` (compactly supported quintic ramp). From a
profile and a jump strength beta we build evaluable potentials:

* duality  — beta·sigma_a''(x) / (x + beta·sigma_a(x)), the regularization
  whose a→0 limit produces a value jump 2·beta·psi'(0) in odd waves while
  staying transparent in the even sector;
* comb     — the three-spike delta comb (Cheon–Shigehara style) realizing
  the same connection condition, spikes mollified on an inner scale;
* naive    — bookkeeping for the d/dx[sigma_a'·psi'] counterexample (no plain
  potential exists; the solver treats it as a first-order system);
* lorentz  — bookkeeping for the exactly solvable Lorentzian toy model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad
from scipy.special import k1

from .errors import AdmissibilityViolation, DomainError, QuadratureFailure, UnknownProfile

__all__ = [
    "MollifierProfile",
    "PointPotential",
    "PotentialFourier",
    "make_profile",
    "duality_potential",
    "comb_potential",
    "naive_potential",
    "lorentz_potential",
    "eval_potential",
    "potential_fourier",
    "sech2",
]


def sech2(t):
    """sech²(t) without cosh overflow: 4e^{-2|t|} / (1 + e^{-2|t|})²."""
    e = np.exp(-2.0 * np.abs(t))
    return 4.0 * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class MollifierProfile:
    """An odd smooth step and the derived quantities the pipelines need.

    ``fourier_sigma1`` is the transform of sigma', normalized so that its
    value at 0 equals ∫sigma' dt = 2. ``sigma1_sq_integral`` is the full-line
    integral of its square (enters the 1/a divergence bookkeeping).
    ``far_tail`` is the T beyond which |sigma(T)-1| and |T² sigma''(T)| are
    both below 1e-6.
    """

    name: str
    sigma: Callable[[np.ndarray], np.ndarray]
    sigma1: Callable[[np.ndarray], np.ndarray]
    sigma2: Callable[[np.ndarray], np.ndarray]
    sigma3_at_0: float
    sigma1_at_0: float
    fourier_sigma1: Callable[[np.ndarray], np.ndarray]
    sigma1_sq_integral: float
    far_tail: float
    compact_support: float | None = None  # sigma' support radius, if finite


# --- the three shipped profiles --------------------------------------------

def _tanh_fourier_sigma1(w):
    # 2s/sinh(s) with s = pi*w/2, evaluated overflow-free.
    s = np.abs(np.asarray(w, dtype=float)) * (math.pi / 2.0)
    small = s < 1e-6
    s_safe = np.where(small, 1.0, s)
    e = np.exp(-s_safe)
    val = 4.0 * s_safe * e / (1.0 - e * e)
    return np.where(small, 2.0 - s * s / 3.0, val)


def _algebraic_fourier_sigma1(w):
    aw = np.abs(np.asarray(w, dtype=float))
    tiny = aw < 1e-8
    aw_safe = np.where(tiny, 1.0, aw)
    return np.where(tiny, 2.0, 2.0 * aw_safe * k1(aw_safe))


def _smoothstep_fourier_sigma1(w):
    w = np.asarray(w, dtype=float)
    aw = np.abs(w)
    small = aw < 0.5
    # series: 30 Σ (-1)^m w^{2m} / [(2m)! (2m+1)(2m+3)(2m+5)]
    w2 = w * w
    ser = np.zeros_like(w2)
    coef = np.ones_like(w2)
    for m in range(7):
        den = math.factorial(2 * m) * (2 * m + 1) * (2 * m + 3) * (2 * m + 5)
        ser = ser + coef / den
        coef = coef * (-w2)
    ser *= 30.0
    ws = np.where(small, 1.0, w)
    s, c = np.sin(ws), np.cos(ws)
    closed = (15.0 / 4.0) * (
        s / ws
        - 2.0 * (2.0 * ws * c + (ws**2 - 2.0) * s) / ws**3
        + (4.0 * ws * (ws**2 - 6.0) * c + (ws**4 - 12.0 * ws**2 + 24.0) * s) / ws**5
    )
    return np.where(small, ser, closed)


def _smoothstep_sigma(t):
    t = np.asarray(t, dtype=float)
    tc = np.clip(t, -1.0, 1.0)
    return (15.0 * tc - 10.0 * tc**3 + 3.0 * tc**5) / 8.0


def _smoothstep_sigma1(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) <= 1.0
    return np.where(inside, (15.0 / 8.0) * (1.0 - t * t) ** 2, 0.0)


def _smoothstep_sigma2(t):
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) <= 1.0
    return np.where(inside, -7.5 * t * (1.0 - t * t), 0.0)


_PROFILES: dict[str, MollifierProfile] = {
    "tanh": MollifierProfile(
        name="tanh",
        sigma=np.tanh,
        sigma1=sech2,
        sigma2=lambda t: -2.0 * np.tanh(t) * sech2(t),
        sigma3_at_0=-2.0,
        sigma1_at_0=1.0,
        fourier_sigma1=_tanh_fourier_sigma1,
        sigma1_sq_integral=8.0 * math.pi / 3.0,
        far_tail=12.0,
    ),
    "algebraic": MollifierProfile(
        name="algebraic",
        sigma=lambda t: t / np.sqrt(1.0 + t * t),
        sigma1=lambda t: (1.0 + t * t) ** -1.5,
        sigma2=lambda t: -3.0 * t * (1.0 + t * t) ** -2.5,
        sigma3_at_0=-3.0,
        sigma1_at_0=1.0,
        fourier_sigma1=_algebraic_fourier_sigma1,
        sigma1_sq_integral=3.0 * math.pi**2 / 4.0,
        far_tail=1800.0,  # |sigma-1| ~ 1/(2T²), |T² sigma''| ~ 3/T²
    ),
    "smoothstep": MollifierProfile(
        name="smoothstep",
        sigma=_smoothstep_sigma,
        sigma1=_smoothstep_sigma1,
        sigma2=_smoothstep_sigma2,
        sigma3_at_0=-7.5,
        sigma1_at_0=15.0 / 8.0,
        fourier_sigma1=_smoothstep_fourier_sigma1,
        sigma1_sq_integral=40.0 * math.pi / 7.0,
        far_tail=1.0,
        compact_support=1.0,
    ),
}


def check_admissibility(p: MollifierProfile) -> None:
    """Structural requirements on the step: odd, monotone at 0, saturating.

    Raises AdmissibilityViolation naming the failed condition and location.
    """
    t = np.linspace(0.0, 50.0, 10_000)
    s_pos, s_neg = p.sigma(t), p.sigma(-t)
    bad = np.argmax(np.abs(s_pos + s_neg) > 1e-12)
    if np.abs(s_pos + s_neg)[bad] > 1e-12:
        raise AdmissibilityViolation("sigma must be odd", float(t[bad]))
    d = p.sigma1(t)
    if np.any(d < -1e-14):
        raise AdmissibilityViolation(
            "sigma' must be nonnegative", float(t[np.argmax(d < -1e-14)])
        )
    if not p.sigma1_at_0 > 0.0:
        raise AdmissibilityViolation("sigma'(0) must be positive", 0.0)
    T = p.far_tail
    if abs(float(p.sigma(np.asarray(T))) - 1.0) >= 1e-6:
        raise AdmissibilityViolation("sigma(T) must reach 1 within 1e-6", T)
    if abs(T * T * float(p.sigma2(np.asarray(T)))) >= 1e-6:
        raise AdmissibilityViolation("T² sigma''(T) must vanish within 1e-6", T)


def make_profile(name: str) -> MollifierProfile:
    try:
        p = _PROFILES[name]
    except KeyError:
        raise UnknownProfile(
            f"no profile {name!r}; available: {sorted(_PROFILES)}"
        ) from None
    check_admissibility(p)
    return p


# --- potentials --------------------------------------------------------------

#: evaluable kinds and the two bookkeeping kinds handled by dedicated solvers
KINDS = ("duality", "comb", "naive", "lorentz")


@dataclass(frozen=True)
class PointPotential:
    """A concrete regularized point interaction at range a and strength beta.

    For kind="comb" the profile is absent and ``a_inner`` sets the width of
    the mollified delta spikes. There is no universal safe ratio a_inner/a:
    the central spike has strength ~2·beta/a², so transparency of the spike
    itself requires a_inner ≪ a²/(2·beta), and the side spikes (strength
    ~1/a) acquire a finite-width correction ~a_inner/a² that competes with
    the O(a) quantity being measured. The default keeps both three orders
    below the point-limit values; integration cost does not grow as the
    width shrinks because the stepper only caps steps inside the spikes.
    """

    kind: str
    a: float
    beta: float
    profile: MollifierProfile | None = None
    a_inner: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.a <= 0.0:
            raise DomainError("range a must be positive")
        if self.kind == "duality" and self.beta < 0.0:
            raise DomainError("duality kind requires beta >= 0 (attractive case out of scope)")
        if self.kind in ("duality", "naive") and self.profile is None:
            raise DomainError(f"kind={self.kind!r} needs a profile")

    def sigma_a(self, x):
        return self.profile.sigma(np.asarray(x, dtype=float) / self.a)

    def sigma1_a(self, x):
        return self.profile.sigma1(np.asarray(x, dtype=float) / self.a) / self.a

    def sigma2_a(self, x):
        return self.profile.sigma2(np.asarray(x, dtype=float) / self.a) / self.a**2


def duality_potential(profile: MollifierProfile | str, a: float, beta: float) -> PointPotential:
    if isinstance(profile, str):
        profile = make_profile(profile)
    return PointPotential(kind="duality", a=a, beta=beta, profile=profile)


def comb_potential(a: float, beta: float, a_inner: float | None = None) -> PointPotential:
    if beta <= 0.0:
        raise DomainError("comb needs beta > 0 (spike weights contain 1/beta)")
    if a_inner is None:
        a_inner = min(a / 100.0, 0.001 * a * a / (2.0 * beta))
    if not 0.0 < a_inner < a / 10.0:
        raise DomainError("a_inner must sit well below the spike spacing a")
    return PointPotential(kind="comb", a=a, beta=beta, a_inner=a_inner)


def naive_potential(profile: MollifierProfile | str, a: float, beta: float) -> PointPotential:
    if isinstance(profile, str):
        profile = make_profile(profile)
    return PointPotential(kind="naive", a=a, beta=beta, profile=profile)


def lorentz_potential(a: float, beta: float) -> PointPotential:
    return PointPotential(kind="lorentz", a=a, beta=beta)


def eval_potential(p: PointPotential, x) -> np.ndarray:
    """Pointwise V(x). Even in x by construction.

    duality: beta·sigma_a''/(x + beta·sigma_a). Numerator and denominator
    both vanish linearly at 0; within |x| < 1e-3·a we switch to the Taylor
    quotient (beta·sigma'''(0)/a³ + O(x²)) / (1 + beta·sigma'(0)/a + O(x²)),
    which agrees with the direct form to machine precision at the switch.

    comb: three Gaussian spikes of unit integral, width a_inner, at 0 and ±a
    with weights 2(beta/a² − 1/a) and (1/beta − 1/a).
    """
    x = np.asarray(x, dtype=float)
    if p.kind == "duality":
        if p.beta == 0.0:
            return np.zeros_like(x)
        prof, a, beta = p.profile, p.a, p.beta
        t = x / a
        t_safe = np.where(np.abs(t) < 1e-3, 1.0, t)
        num = beta * prof.sigma2(t_safe) / a**2
        den = t_safe * a + beta * prof.sigma(t_safe)
        v0 = (beta * prof.sigma3_at_0 / a**3) / (1.0 + beta * prof.sigma1_at_0 / a)
        return np.where(np.abs(t) < 1e-3, v0, num / np.where(den == 0.0, 1.0, den))
    if p.kind == "comb":
        a, beta, w = p.a, p.beta, p.a_inner
        norm = 1.0 / (w * math.sqrt(2.0 * math.pi))
        bump = lambda c: norm * np.exp(-0.5 * ((x - c) / w) ** 2)
        side = 1.0 / beta - 1.0 / a
        center = 2.0 * (beta / a**2 - 1.0 / a)
        return side * (bump(-a) + bump(a)) + center * bump(0.0)
    raise DomainError(
        f"kind={p.kind!r} has no plain potential; use its dedicated solver routine"
    )


# --- Fourier side -------------------------------------------------------------

@dataclass(frozen=True)
class PotentialFourier:
    """Transform data for a potential: table, callable, and the small-beta
    expansion ingredients used by the divergence audit."""

    lambdas: np.ndarray
    vhat_values: np.ndarray
    vhat: Callable[[float], float]
    F: Callable[[float], float]  # ∫₀^x z·(transform of sigma')(z) dz
    sigma1_sq_integral: float
    order_beta: Callable[[float], float] = field(repr=False, default=None)
    order_beta2_coeff: float = 0.0


def _vhat_duality(p: PointPotential, lam: float) -> float:
    prof, a, beta = p.profile, p.a, p.beta
    if beta == 0.0:
        return 0.0
    # truncate where the integrand is dead: sigma'' tail plus oscillation margin
    x_tr = max(50.0 * a, 50.0 * beta) + (10.0 / abs(lam) if lam != 0.0 else 0.0)
    if prof.compact_support is not None:
        x_tr = min(x_tr, prof.compact_support * a * 1.0000001)
    f = lambda x: float(eval_potential(p, x)) * math.cos(lam * x)
    val, err = quad(f, 0.0, x_tr, limit=400, epsabs=1e-12, epsrel=1e-11,
                    points=[a, 5.0 * a] if 5.0 * a < x_tr else [a])
    if err > 1e-7 * max(1.0, abs(val)):
        raise QuadratureFailure(
            f"transform at lambda={lam:g}: estimated error {err:.2e}"
        )
    return 2.0 * val


def potential_fourier(p: PointPotential, lambda_grid: Sequence[float]) -> PotentialFourier:
    """Cosine transform V̂(λ) on a grid plus the beta-expansion pieces.

    The order-beta piece of V̂(λ)−V̂(0) tends to beta·λ² as a→0; the order-
    beta² coefficient carries the 1/a divergence −beta²λ²/(4aπ)·∫(σ̂')².
    """
    if p.kind != "duality":
        raise DomainError("transform implemented for the duality kind")
    lams = np.asarray(lambda_grid, dtype=float)
    vals = np.array([_vhat_duality(p, lam) for lam in lams])
    prof = p.profile

    def vhat(lam: float) -> float:
        return _vhat_duality(p, float(lam))

    def F(s: float) -> float:
        s = float(s)
        if s == 0.0:
            return 0.0
        val, _ = quad(lambda z: z * float(prof.fourier_sigma1(z)), 0.0, abs(s),
                      limit=200, epsabs=1e-12, epsrel=1e-11)
        return val

    return PotentialFourier(
        lambdas=lams,
        vhat_values=vals,
        vhat=vhat,
        F=F,
        sigma1_sq_integral=prof.sigma1_sq_integral,
        order_beta=lambda lam: lam * lam,
        order_beta2_coeff=-p.beta**2 / (4.0 * p.a * math.pi) * prof.sigma1_sq_integral,
    )
