"""Connection conditions at a point: matrix algebra and jump parameters.

A pointlike interaction relates boundary data across the origin through
(psi+, psi+') = e^{i·theta} [[a, b], [c, d]] (psi-, psi-') with ad - bc = 1,
or decouples the half-lines entirely (separated wall, psi'± = h±·psi±).

Two scalar parameters characterize the physical families: the derivative
jump gamma (continuous psi, psi' jumps by 2·gamma·psi — the delta
interaction) and the value jump beta (continuous psi', psi jumps by
2·beta·psi' — the delta'-type interaction this package regularizes).
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass

from .errors import NotUnimodular, WallVariant

__all__ = [
    "InteractionMatrix",
    "SeparatedWall",
    "JumpParameters",
    "Classification",
    "derivative_jump_matrix",
    "value_jump_matrix",
    "hardcore_matrix",
    "general_symmetric_matrix",
    "classify",
    "apply_connection",
    "jump_parameters",
]

_TOL = 1e-12

_SPLIT = 134217729.0  # 2^27 + 1, Veltkamp splitter


def _two_prod(x: float, y: float) -> tuple[float, float]:
    p = x * y
    f = _SPLIT * x
    xh = f - (f - x)
    xl = x - xh
    f = _SPLIT * y
    yh = f - (f - y)
    yl = y - yh
    return p, ((xh * yh - p) + xh * yl + xl * yh) + xl * yl


def _dot2(x1: float, y1: float, x2: float, y2: float) -> float:
    # x1·y1 + x2·y2 faithfully rounded; keeps composed matrices unimodular
    # to entry-level rounding instead of intermediate-product rounding
    p1, e1 = _two_prod(x1, y1)
    p2, e2 = _two_prod(x2, y2)
    s = p1 + p2
    t = s - p1
    e = (p1 - (s - t)) + (p2 - t)
    return s + (e + e1 + e2)


@dataclass(frozen=True)
class InteractionMatrix:
    """Unimodular 2×2 connection matrix with a phase."""

    a: float
    b: float
    c: float
    d: float
    theta: float = 0.0

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        # scale-aware gate: ad - bc of a composed matrix carries rounding
        # proportional to the product magnitudes, not to 1
        scale = max(1.0, abs(self.a * self.d) + abs(self.b * self.c))
        if abs(det - 1.0) > _TOL * scale:
            raise NotUnimodular(f"ad - bc = {det!r}, need 1")

    def inverse(self) -> "InteractionMatrix":
        # unimodular inverse: [[d, -b], [-c, a]], phase negated
        return InteractionMatrix(self.d, -self.b, -self.c, self.a, -self.theta)

    def __matmul__(self, other: "InteractionMatrix") -> "InteractionMatrix":
        if not isinstance(other, InteractionMatrix):
            return NotImplemented
        a = _dot2(self.a, other.a, self.b, other.c)
        b = _dot2(self.a, other.b, self.b, other.d)
        c = _dot2(self.c, other.a, self.d, other.c)
        d = _dot2(self.c, other.b, self.d, other.d)
        # both factors satisfy det = 1 only to within their own entry
        # rounding, and determinants multiply, so the raw product can drift
        # past the gate; project back onto the constraint surface
        det = _dot2(a, d, -b, c)
        if det > 0.0:
            r = 1.0 / math.sqrt(det)
            a, b, c, d = a * r, b * r, c * r, d * r
        return InteractionMatrix(a, b, c, d, self.theta + other.theta)

    def to_json(self) -> str:
        return json.dumps(
            {"theta": self.theta, "a": self.a, "b": self.b, "c": self.c, "d": self.d}
        )

    @classmethod
    def from_json(cls, text: str) -> "InteractionMatrix":
        o = json.loads(text)
        return cls(o["a"], o["b"], o["c"], o["d"], o.get("theta", 0.0))


@dataclass(frozen=True)
class SeparatedWall:
    """Decoupled half-lines with Robin data psi'± = h±·psi±."""

    h_plus: float
    h_minus: float

    def boundary_residual(self, psi: float, dpsi: float, side: str) -> float:
        h = self.h_plus if side == "plus" else self.h_minus
        return dpsi - h * psi


@dataclass(frozen=True)
class JumpParameters:
    """Extended-real (gamma, beta); math.inf encodes the poles."""

    gamma: float
    beta: float


@dataclass(frozen=True)
class Classification:
    """Family tag plus the family's own parameters (None where undefined)."""

    tag: str
    gamma: float | None = None
    beta: float | None = None


# --- named constructors -------------------------------------------------------

def derivative_jump_matrix(gamma: float) -> InteractionMatrix:
    """Continuous psi, derivative jumps by 2·gamma·psi (bosonic delta)."""
    return InteractionMatrix(1.0, 0.0, 2.0 * gamma, 1.0)


def value_jump_matrix(beta: float) -> InteractionMatrix:
    """Continuous psi', value jumps by 2·beta·psi' — transparent for bosons."""
    return InteractionMatrix(1.0, 2.0 * beta, 0.0, 1.0)


def hardcore_matrix(q: float) -> InteractionMatrix:
    """[[-1, 0], [-2q, -1]] — hard-core for bosons.

    Note the fermionic action: on data with continuous derivative this
    matrix forces psi- = -psi'/q, i.e. a value jump 2·psi'/q. Its effective
    value-jump strength is therefore 1/q, not q (see jump_parameters).
    """
    return InteractionMatrix(-1.0, 0.0, -2.0 * q, -1.0)


def general_symmetric_matrix(gamma: float, beta: float) -> InteractionMatrix:
    """Symmetric family [[a, b], [c, a]] realizing both jumps at once.

    Inverts gamma = (a-1)/b, beta = b/(1+a) under a² - bc = 1; requires
    gamma·beta != 1 (the product 1 point is the separated limit).
    """
    gb = gamma * beta
    if abs(1.0 - gb) < 1e-14:
        raise NotUnimodular("gamma*beta = 1 has no finite symmetric matrix")
    a = (1.0 + gb) / (1.0 - gb)
    b = 2.0 * beta / (1.0 - gb)
    c = 2.0 * gamma / (1.0 - gb)
    return InteractionMatrix(a, b, c, a)


# --- operations ----------------------------------------------------------------

def apply_connection(m, psi_minus: float, dpsi_minus: float):
    """Map (psi-, psi-') to (psi+, psi+'). Complex when theta != 0."""
    if isinstance(m, SeparatedWall):
        raise WallVariant("separated wall does not map data across the point")
    phase = cmath.exp(1j * m.theta) if m.theta != 0.0 else 1.0
    psi_p = phase * (m.a * psi_minus + m.b * dpsi_minus)
    dpsi_p = phase * (m.c * psi_minus + m.d * dpsi_minus)
    if m.theta == 0.0:
        return float(psi_p.real) if isinstance(psi_p, complex) else psi_p, \
               float(dpsi_p.real) if isinstance(dpsi_p, complex) else dpsi_p
    return psi_p, dpsi_p


def jump_parameters(m) -> JumpParameters:
    """Both jump parameters as extended reals, defined by the matrix action.

    beta (value jump): feed data with continuous derivative through the
    matrix and solve psi+ - psi- = 2·beta·psi'. For a != -1 this reduces to
    the scalar formula b/(1+a); at a = -1 with b = 0 the action gives
    -2/c; at a = -1 with b != 0 no finite beta exists (±inf by sign of b).

    gamma (derivative jump): dually, (a-1)/b for b != 0; at b = 0 it is c/2
    when a = 1, else ±inf (hard-core for bosons).
    """
    if isinstance(m, SeparatedWall):
        raise WallVariant("separated wall carries no jump parameters")
    a, b, c = m.a, m.b, m.c
    if b != 0.0:
        gamma = (a - 1.0) / b
    elif abs(a - 1.0) <= _TOL:
        gamma = c / 2.0
    else:
        gamma = math.copysign(math.inf, -c if c != 0.0 else 1.0)
    if abs(a + 1.0) > _TOL:
        beta = b / (1.0 + a)
    elif b == 0.0:
        beta = math.inf if c == 0.0 else -2.0 / c
    else:
        beta = math.copysign(math.inf, b)
    return JumpParameters(gamma=gamma, beta=beta)


def classify(m) -> Classification:
    """Most-specific family tag for a connection.

    Precedence (nonzero parameter required for the single-parameter
    families, so the identity lands in the two-parameter symmetric family):
    separated wall > derivative-jump > value-jump > hardcore-variant >
    general-symmetric (a = d, theta = 0) > general.
    """
    if isinstance(m, SeparatedWall):
        return Classification("separated_wall")
    det = m.a * m.d - m.b * m.c
    if abs(det - 1.0) > _TOL:
        raise NotUnimodular(f"ad - bc = {det!r}")
    a, b, c, d, th = m.a, m.b, m.c, m.d, m.theta
    if th == 0.0 and a == 1.0 and d == 1.0 and b == 0.0 and c != 0.0:
        return Classification("derivative_jump", gamma=c / 2.0)
    if th == 0.0 and a == 1.0 and d == 1.0 and c == 0.0 and b != 0.0:
        return Classification("value_jump", beta=b / 2.0)
    if th == 0.0 and a == -1.0 and d == -1.0 and b == 0.0:
        # family label is the matrix parameter q; the fermionic action
        # strength is 1/q, reported by jump_parameters
        return Classification("hardcore_variant", beta=-c / 2.0)
    if th == 0.0 and a == d:
        jp = jump_parameters(m)
        return Classification("general_symmetric", gamma=jp.gamma, beta=jp.beta)
    return Classification("general")
