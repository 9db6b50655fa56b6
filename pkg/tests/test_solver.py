"""Integration routes for the regularized point interactions.

The strong checks here are cross-route: closed forms where they exist,
contour-radius independence for the principal value, step-halving for the
fixed-step kernel. Limiting behaviour at small range is exercised lightly;
the full sweeps live in the acceptance layer.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad, solve_ivp

from pointjump import profiles, solver
from pointjump.errors import (
    DomainError,
    NoFreeRegion,
    ResonantBox,
    SingularCoefficient,
)


def test_zero_energy_solution_is_shifted_line():
    # at k=0 the odd solution is exactly (x + beta·sigma_a)/(x0 + beta·sigma_a(x0))
    a, beta, x0 = 5e-3, 0.8, 1.0
    prof = profiles.make_profile("algebraic")
    p = profiles.duality_potential(prof, a, beta)
    sol = solver.solve_odd(p, 0.0, x0)
    exact = sol.grid + beta * prof.sigma(sol.grid / a)
    exact /= exact[-1]
    err = np.max(np.abs(sol.psi - exact)) / np.max(np.abs(exact))
    assert err < 1e-9


def test_odd_solution_ode_residual():
    p = profiles.duality_potential("tanh", 1e-2, 0.5)
    sol = solver.solve_odd(p, 1.0)
    assert solver.ode_residual(sol) < 1e-5
    assert sol.psi[0] == 0.0
    assert sol.psi[-1] == pytest.approx(1.0)


def test_comb_solution_runs_and_measures_jump():
    p = profiles.comb_potential(0.05, 0.5)
    rep = solver.extract_jump(solver.solve_odd(p, 1.0), p)
    # coarse range: only the trend is asserted here (sweep in acceptance)
    assert abs(rep.beta_eff - 0.5) < 0.5
    assert rep.fit_residual < 1e-6


def test_extract_jump_recovers_planted_amplitudes():
    k, x0 = 1.3, 40.0
    P, Q = 0.8, -0.35
    p = profiles.duality_potential("tanh", 1e-4, 0.2)
    xs = np.linspace(0.0, x0, 4001)
    sol = solver.WaveSolution(grid=xs, psi=P * np.sin(k * xs) + Q * np.cos(k * xs),
                              dpsi=k * (P * np.cos(k * xs) - Q * np.sin(k * xs)),
                              k=k, potential=p)
    rep = solver.extract_jump(sol, p)
    assert rep.beta_eff == pytest.approx(Q / (k * P), rel=1e-10)
    assert rep.P == pytest.approx(P, rel=1e-10)


def test_closed_jump_solution_boundary_data():
    w = solver.ClosedJumpSolution(k=1.7, beta=0.4)
    eps = 1e-9
    jump = float(w(eps) - w(-eps))
    dw0 = float(w.derivative(0.0))
    assert jump == pytest.approx(2.0 * 0.4 * dw0, rel=1e-6)
    # derivative even in x: continuous across the point
    assert float(w.derivative(eps)) == pytest.approx(float(w.derivative(-eps)), rel=1e-12)
    # and it solves the free equation (atol floor: FD noise near the zeros)
    xs = np.linspace(0.1, 5.0, 57)
    h = 1e-5
    d2 = (w(xs + h) - 2.0 * w(xs) + w(xs - h)) / h**2
    np.testing.assert_allclose(d2, -w.k**2 * w(xs), rtol=1e-4, atol=2e-5)


def test_even_mode_wronskian_is_one():
    p = profiles.duality_potential("algebraic", 1e-2, 0.5)
    phi = solver.solve_even_zero_mode(p, 1.0)
    psi0 = phi.grid + p.beta * p.sigma_a(phi.grid)
    dpsi0 = 1.0 + p.beta * p.sigma1_a(phi.grid)
    wr = dpsi0 * phi.psi - psi0 * phi.dpsi
    np.testing.assert_allclose(wr, 1.0, rtol=0, atol=1e-12)


def test_even_mode_far_field():
    # phi → -x/beta + O(a·log) for x beyond the range
    beta = 0.5
    p = profiles.duality_potential("tanh", 1e-3, beta)
    phi = solver.solve_even_zero_mode(p, 1.0)
    x = 0.5
    val = float(np.interp(x, phi.grid, phi.psi))
    assert val == pytest.approx(-x / beta, rel=0.05)
    ia = solver.integral_ia(p, x)
    assert ia == pytest.approx(-1.0 / beta, rel=0.05)
    # shrinking the range improves the limit
    p2 = profiles.duality_potential("tanh", 1e-4, beta)
    assert abs(solver.integral_ia(p2, x) + 1.0 / beta) < abs(ia + 1.0 / beta)


def test_sweep_converges_first_order():
    rows = solver.sweep_a("duality", "tanh", 0.5, 1.0, [0.05, 0.02])
    errs = [r["abs_error"] for r in rows]
    assert errs[1] < errs[0]
    assert 0.6 < rows[0]["fitted_order"] < 1.4
    assert all(r["error"] == "" for r in rows)


def test_sweep_survives_bad_row():
    rows = solver.sweep_a("duality", "tanh", 0.5, 1.0, [-1.0, 0.05])
    assert rows[0]["error"] != ""
    assert math.isnan(rows[0]["beta_eff"])
    assert rows[1]["error"] == ""


def test_resonant_box_detected():
    p = profiles.duality_potential("tanh", 1e-3, 0.0)
    with pytest.raises(ResonantBox):
        solver.solve_odd(p, 1.0, math.pi)


def test_free_region_requires_dead_tail():
    p = profiles.duality_potential("tanh", 0.3, 0.5)
    with pytest.raises(NoFreeRegion):
        solver.find_free_region(p, 1.0, 1.0)  # box inside the tail
    x_free = solver.find_free_region(p, 1.0, 50.0)
    assert 0.3 < x_free < 50.0
    assert abs(float(profiles.eval_potential(p, x_free))) <= 1.01e-8


def test_auto_x0_lands_in_free_region():
    p = profiles.duality_potential("algebraic", 0.05, 1.0)
    k = 1.0
    x0 = solver.auto_x0(p, k)
    assert abs(math.sin(k * x0)) >= 0.1
    assert abs(float(profiles.eval_potential(p, x0))) < 1e-8 * k * k


# --- naive derivative coupling ---------------------------------------------------

def test_naive_regular_scaling_limit():
    # with beta = r·a the inner layer contributes a one-sided value
    # u·a·∫[1/(1 - r·σ'(t)) - 1]dt, so beta_eff/a converges to that integral
    # — not to r: the coupling never calibrates to the strength it names
    r = 0.4
    c_r, _ = quad(lambda t: 1.0 / (1.0 - r / math.cosh(t) ** 2) - 1.0,
                  0.0, 40.0, limit=200)
    a = 0.005
    sol, rep = solver.solve_naive_delta_prime("tanh", a, r * a, 1.0)
    assert rep.beta_eff / a == pytest.approx(c_r, rel=1e-3)
    assert abs(c_r / r - 1.0) > 0.3
    assert sol.parity == "odd"


def test_naive_singular_regime_guard():
    with pytest.raises(SingularCoefficient):
        solver.solve_naive_delta_prime("tanh", 1e-3, 0.1, 1.0)
    with pytest.raises(DomainError):
        solver.naive_pv_jump("tanh", 0.01, 0.001, 1.0)  # peak < 1: not singular


def test_pv_contour_radius_independence():
    # the principal value cannot depend on the excursion radius
    a, beta, k = 2e-3, 0.1, 1.0
    r1 = solver.naive_pv_jump("tanh", a, beta, k, ratio=0.2)
    r2 = solver.naive_pv_jump("tanh", a, beta, k, ratio=0.45)
    assert r1.beta_eff == pytest.approx(r2.beta_eff, abs=1e-6)
    assert abs(r1.beta_eff) < 0.1 * beta


def test_first_order_naive_jump_quadratic_in_range():
    beta, k = 0.1, 1.0
    errs = [abs(solver.first_order_naive_jump("tanh", a, beta, k) - beta)
            for a in (0.02, 0.01)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)


# --- Lorentzian toy ---------------------------------------------------------------

def test_lorentzian_regular_matches_quadrature():
    a, beta = 0.05, 0.02  # below threshold pi·a/2
    xs = [0.3, -0.2, 1.0]
    vals = solver.lorentzian_toy(a, beta, xs)
    for x, v in zip(xs, vals):
        den = lambda y: 1.0 - beta * (2.0 / math.pi) * a / (a * a + y * y)
        ref, _ = quad(lambda y: 1.0 / den(y), -1.0, x, limit=200)
        assert v == pytest.approx(ref, rel=1e-9)


def test_lorentzian_pv_self_check():
    a, beta = 1e-3, 0.3  # above threshold: real roots, principal value
    x = 20.0 * a
    xs = np.array([-x, x])
    vals = solver.lorentzian_toy(a, beta, xs, pv_check=True)  # raises if excision disagrees
    first = solver.lorentzian_toy(a, beta, xs, first_order=True)
    # across the origin the first-order form jumps by ~2·beta·(2/π)·atan(20);
    # the exact principal value stays continuous (gap shrinks with a)
    gap_exact = float(vals[1] - vals[0] - 2.0 * x)
    gap_first = float(first[1] - first[0] - 2.0 * x)
    assert gap_first == pytest.approx(2.0 * beta * (2.0 / math.pi) * math.atan(20.0),
                                      rel=1e-12)
    assert abs(gap_exact) < 0.1 * abs(gap_first)


def test_lorentzian_threshold_raises():
    a = 0.05
    with pytest.raises(DomainError):
        solver.lorentzian_toy(a, math.pi * a / 2.0, [0.5])


def test_first_order_lorentzian_closed_form():
    a, beta = 1e-3, 0.3
    xs = np.array([-0.4, 0.4])
    got = solver.lorentzian_toy(a, beta, xs, first_order=True)
    ref = xs + beta * (2.0 / math.pi) * np.arctan(xs / a) + 1.0
    np.testing.assert_allclose(got, ref, rtol=1e-14)


def test_default_grid_layout():
    g = solver.default_grid(1e-2, 2.0)
    assert g[0] == 0.0 and g[-1] == 2.0
    assert np.all(np.diff(g) > 0)
    core = g[(g > 0) & (g <= 0.1)]
    assert np.max(np.diff(core)) < 1e-2 / 3.0
