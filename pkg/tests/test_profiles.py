import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from pointjump import profiles
from pointjump.errors import DomainError, UnknownProfile

mp.mp.dps = 50

# independent closed forms for the three steps, evaluated at high precision
_MP = {
    "tanh": (
        lambda t: mp.tanh(t),
        lambda t: mp.sech(t) ** 2,
        lambda t: -2 * mp.tanh(t) * mp.sech(t) ** 2,
    ),
    "algebraic": (
        lambda t: t / mp.sqrt(1 + t * t),
        lambda t: (1 + t * t) ** mp.mpf("-1.5"),
        lambda t: -3 * t * (1 + t * t) ** mp.mpf("-2.5"),
    ),
    "smoothstep": (
        lambda t: mp.sign(t) if abs(t) >= 1
        else (15 * t - 10 * t**3 + 3 * t**5) / 8,
        lambda t: 0 if abs(t) >= 1 else mp.mpf(15) / 8 * (1 - t * t) ** 2,
        lambda t: 0 if abs(t) >= 1 else mp.mpf("-7.5") * t * (1 - t * t),
    ),
}

NAMES = tuple(_MP)


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("t", [0.0, 0.1, 0.7, 0.999, 2.5, -1.3])
def test_step_values_against_high_precision(name, t):
    prof = profiles.make_profile(name)
    fs, f1, f2 = _MP[name]
    tt = np.asarray(t)
    assert float(prof.sigma(tt)) == pytest.approx(float(fs(mp.mpf(t))), rel=1e-14, abs=1e-15)
    assert float(prof.sigma1(tt)) == pytest.approx(float(f1(mp.mpf(t))), rel=1e-14, abs=1e-15)
    assert float(prof.sigma2(tt)) == pytest.approx(float(f2(mp.mpf(t))), rel=1e-13, abs=1e-14)


@pytest.mark.parametrize("name,s3,s1", [
    ("tanh", -2.0, 1.0),
    ("algebraic", -3.0, 1.0),
    ("smoothstep", -7.5, 1.875),
])
def test_origin_derivatives(name, s3, s1):
    prof = profiles.make_profile(name)
    assert prof.sigma3_at_0 == s3
    assert prof.sigma1_at_0 == s1
    # third derivative from the high-precision second derivative
    f2 = _MP[name][2]
    h = mp.mpf("1e-10")
    assert float(f2(h) / h) == pytest.approx(s3, rel=1e-6)


@settings(max_examples=60)
@given(t=st.floats(min_value=1e-6, max_value=30.0),
       name=st.sampled_from(NAMES))
def test_parity(t, name):
    prof = profiles.make_profile(name)
    tp, tm = np.asarray(t), np.asarray(-t)
    assert float(prof.sigma(tp)) == -float(prof.sigma(tm))
    assert float(prof.sigma1(tp)) == pytest.approx(float(prof.sigma1(tm)), rel=1e-14)
    assert float(prof.sigma2(tp)) == pytest.approx(-float(prof.sigma2(tm)), rel=1e-14)


@pytest.mark.parametrize("name", NAMES)
def test_step_saturates(name):
    prof = profiles.make_profile(name)
    T = prof.far_tail
    assert abs(float(prof.sigma(np.asarray(T))) - 1.0) <= 1e-6
    assert abs(T * T * float(prof.sigma2(np.asarray(T)))) <= 1e-6
    profiles.check_admissibility(prof)


def test_compact_support_flag():
    assert profiles.make_profile("smoothstep").compact_support == 1.0
    assert profiles.make_profile("tanh").compact_support is None


def test_unknown_profile():
    with pytest.raises(UnknownProfile):
        profiles.make_profile("gauss")


# --- transform of the step derivative ------------------------------------------

@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("w", [0.0, 0.5, 2.0, 7.0])
def test_fourier_sigma1_matches_quadrature(name, w):
    prof = profiles.make_profile(name)
    f1 = _MP[name][1]
    g = lambda t: f1(t) * mp.cos(w * t)
    if name == "smoothstep":
        ref = 2 * mp.quad(g, [0, 1])
    elif w > 0 and name == "algebraic":
        # power-law tail: plain quad stalls on the oscillation
        ref = 2 * mp.quadosc(g, [0, mp.inf], omega=w)
    else:
        ref = 2 * mp.quad(g, [0, mp.inf])
    assert float(prof.fourier_sigma1(np.asarray(w))) == pytest.approx(
        float(ref), rel=1e-9, abs=1e-12)


def test_fourier_sigma1_normalization_and_parity():
    for name in NAMES:
        prof = profiles.make_profile(name)
        assert float(prof.fourier_sigma1(np.asarray(0.0))) == pytest.approx(2.0, rel=1e-12)
        w = np.asarray([3.3])
        assert prof.fourier_sigma1(w) == pytest.approx(prof.fourier_sigma1(-w))


@pytest.mark.parametrize("name,closed", [
    ("tanh", 8.0 * math.pi / 3.0),
    ("algebraic", 3.0 * math.pi**2 / 4.0),
    ("smoothstep", 40.0 * math.pi / 7.0),
])
def test_sigma1_sq_integral(name, closed):
    prof = profiles.make_profile(name)
    assert prof.sigma1_sq_integral == pytest.approx(closed, rel=1e-12)
    # and the stored constant really is the full-line integral of the square
    val, err = quad(lambda w: float(prof.fourier_sigma1(np.asarray(w))) ** 2,
                    0.0, 200.0, limit=400)
    assert 2.0 * val == pytest.approx(closed, rel=1e-7)


# --- concrete potentials --------------------------------------------------------

def test_duality_potential_value():
    a, beta = 0.1, 0.5
    p = profiles.duality_potential("tanh", a, beta)
    x = mp.mpf("0.05")
    t = x / a
    ref = beta * (-2 * mp.tanh(t) * mp.sech(t) ** 2) / a**2 / (x + beta * mp.tanh(t))
    got = float(profiles.eval_potential(p, 0.05))
    assert got == pytest.approx(float(ref), rel=1e-13)
    # even continuation across the removable point at 0
    v0 = float(profiles.eval_potential(p, 0.0))
    ref0 = beta * (-2.0) / a**3 / (1.0 + beta / a)
    assert v0 == pytest.approx(ref0, rel=1e-13)
    near = float(profiles.eval_potential(p, 1e-5 * a))
    assert near == pytest.approx(v0, rel=1e-6)


def test_duality_potential_is_even():
    p = profiles.duality_potential("algebraic", 0.02, 1.1)
    xs = np.array([1e-4, 0.01, 0.05, 0.4])
    np.testing.assert_allclose(profiles.eval_potential(p, xs),
                               profiles.eval_potential(p, -xs), rtol=1e-14)


def test_duality_rejects_attractive():
    with pytest.raises(DomainError):
        profiles.duality_potential("tanh", 0.1, -0.2)


def test_comb_weights_and_mass():
    a, beta = 0.05, 0.4
    p = profiles.comb_potential(a, beta, a_inner=a / 50.0)
    w = p.a_inner
    # spike heights encode the weights: value at a center is weight/(w·√2π)
    norm = 1.0 / (w * math.sqrt(2.0 * math.pi))
    v0 = float(profiles.eval_potential(p, 0.0))
    vs = float(profiles.eval_potential(p, a))
    assert v0 == pytest.approx(2.0 * (beta / a**2 - 1.0 / a) * norm, rel=1e-12)
    assert vs == pytest.approx((1.0 / beta - 1.0 / a) * norm, rel=1e-9)
    # per-spike mass over an 8-width window; whole-interval quadrature would
    # step straight over spikes this narrow
    def spike_mass(c):
        val, _ = quad(lambda x: float(profiles.eval_potential(p, x)),
                      c - 8.0 * w, c + 8.0 * w, limit=200)
        return val
    assert spike_mass(0.0) == pytest.approx(2.0 * (beta / a**2 - 1.0 / a), rel=1e-9)
    assert spike_mass(a) == pytest.approx(1.0 / beta - 1.0 / a, rel=1e-9)
    assert spike_mass(-a) == pytest.approx(spike_mass(a), rel=1e-12)


def test_comb_default_width_guard():
    p = profiles.comb_potential(0.05, 0.4)
    assert 0.0 < p.a_inner < 0.05 / 10.0
    with pytest.raises(DomainError):
        profiles.comb_potential(0.05, 0.4, a_inner=0.04)
    with pytest.raises(DomainError):
        profiles.comb_potential(0.05, -0.4)


def test_bookkeeping_kinds_do_not_evaluate():
    p = profiles.lorentz_potential(0.1, 0.3)
    with pytest.raises(DomainError):
        profiles.eval_potential(p, 0.5)


def test_transform_gap_two_term_structure():
    # V̂(λ) - V̂(0) = beta·λ² - beta²·λ²/(4πa)·∫(σ̂')² + smaller, valid for
    # beta well below a (the strength expansion is at fixed range)
    a, beta = 1e-2, 1e-3
    prof = profiles.make_profile("tanh")
    p = profiles.duality_potential(prof, a, beta)
    pf = profiles.potential_fourier(p, [0.0])
    v0 = pf.vhat(0.0)
    for lam in (0.5, 1.0):
        gap = pf.vhat(lam) - v0
        pred = beta * lam**2 * (
            1.0 - beta / (4.0 * math.pi * a) * prof.sigma1_sq_integral)
        assert gap == pytest.approx(pred, rel=2e-2)
        # and the leading term alone is visibly worse than the pair
        assert abs(gap - beta * lam**2) > 2.0 * abs(gap - pred)


def test_transform_table_matches_callable():
    p = profiles.duality_potential("algebraic", 0.02, 0.3)
    grid = [0.0, 1.0, 2.5]
    pf = profiles.potential_fourier(p, grid)
    for lam, val in zip(grid, pf.vhat_values):
        assert val == pytest.approx(pf.vhat(lam), rel=1e-12)
    # F is the moment integral of the slope transform: F(s) ≈ s² at small s
    s = 1e-3
    assert pf.F(s) == pytest.approx(s * s, rel=1e-5)
    assert pf.F(-s) == pf.F(s)
