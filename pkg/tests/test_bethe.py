"""Rapidity solver: limits, route independence, strong-coupling fit."""

import math

import numpy as np
import pytest

from pointjump import bethe
from pointjump.errors import DomainError, FitPoor


def test_single_particle_is_free():
    st = bethe.solve_ground(1, 3.0, 5.0)
    assert st.energy == 0.0
    assert st.rapidities.tolist() == [0.0]


def test_ground_state_structure():
    st = bethe.solve_ground(6, 3.0, 7.0)
    k = st.rapidities
    assert np.all(np.diff(k) > 0.0)
    assert abs(float(np.sum(k))) < 1e-9
    # parity: the ground configuration is mirror-symmetric
    np.testing.assert_allclose(k, -k[::-1], atol=1e-10)
    assert st.residual < 1e-13
    assert st.energy_density == pytest.approx(st.energy / 3.0, rel=1e-15)


def test_newton_and_fixed_point_agree():
    # two routes sharing no linear algebra
    kn = bethe.solve_ground(8, 8.0, 100.0).rapidities
    kf = bethe.fixed_point_ground(8, 8.0, 100.0)
    assert float(np.max(np.abs(kn - kf))) < 1e-11


def test_fixed_point_contraction_gate():
    # 4N/(cL) = 0.909 here: outside the contraction regime
    with pytest.raises(DomainError):
        bethe.fixed_point_ground(8, 8.0, 4.4)


def test_impenetrable_limit_is_free_fermions():
    st = bethe.solve_ground(5, 5.0, 1e8)
    free = sum((2.0 * math.pi * n / 5.0) ** 2 for n in (-2, -1, 0, 1, 2))
    assert st.energy == pytest.approx(free, rel=1e-6)
    # even counts sit on half-integer quantum numbers
    st4 = bethe.solve_ground(4, 5.0, 1e8)
    free4 = sum((2.0 * math.pi * i / 5.0) ** 2 for i in (-1.5, -0.5, 0.5, 1.5))
    assert st4.energy == pytest.approx(free4, rel=1e-6)
    assert st4.quantum_numbers.tolist() == [-1.5, -0.5, 0.5, 1.5]


def test_weak_coupling_is_condensate_mean_field():
    # E → c·N(N−1)/L as the repulsion shuts off; exercises the full
    # continuation ladder (c sits ~5 decades below the momentum spread)
    c = 1e-4
    st = bethe.solve_ground(4, 3.0, c)
    assert st.energy == pytest.approx(c * 4 * 3 / 3.0, rel=1e-3)


def test_energy_monotone_in_coupling():
    es = [bethe.solve_ground(5, 5.0, c).energy for c in (0.5, 2.0, 8.0, 32.0)]
    assert es == sorted(es)
    free = sum((2.0 * math.pi * n / 5.0) ** 2 for n in (-2, -1, 0, 1, 2))
    assert es[-1] < free  # repulsion never overshoots the impenetrable ceiling


def test_input_gates():
    with pytest.raises(DomainError):
        bethe.solve_ground(0, 1.0, 1.0)
    with pytest.raises(DomainError):
        bethe.solve_ground(3, -1.0, 1.0)
    with pytest.raises(DomainError):
        bethe.solve_ground(3, 1.0, 0.0)


def test_state_validation():
    ii = np.array([-0.5, 0.5])
    with pytest.raises(DomainError):  # not increasing
        bethe.BetheState(N=2, L=1.0, c=1.0, rapidities=np.array([1.0, -1.0]),
                         quantum_numbers=ii, residual=0.0)
    with pytest.raises(DomainError):  # unconverged
        bethe.BetheState(N=2, L=1.0, c=1.0, rapidities=np.array([-1.0, 1.0]),
                         quantum_numbers=ii, residual=1e-6)
    with pytest.raises(DomainError):  # carries momentum
        bethe.BetheState(N=2, L=1.0, c=1.0, rapidities=np.array([-1.0, 1.5]),
                         quantum_numbers=ii, residual=0.0)


def test_strong_coupling_fit_lands_on_expansion():
    fit = bethe.strong_coupling_fit(8, 8.0, [400, 800, 1600, 3200, 6400])
    # density 1 ring: expansion coefficients −4 and 12
    assert abs(fit.p + 4.0) < 0.01
    assert abs(fit.q - 12.0) < 0.2
    assert fit.e0 == pytest.approx(math.pi**2 * 42.0 / 128.0, rel=1e-6)
    assert fit.max_rel_resid < 1e-6
    assert 0.0 < fit.p_err < 0.01
    assert 0.0 < fit.q_err < 0.2
    e0, p, q = fit  # tuple protocol used by the reporting layer
    assert (e0, p, q) == (fit.e0, fit.p, fit.q)


def test_fit_rejects_soft_couplings():
    with pytest.raises(FitPoor):
        bethe.strong_coupling_fit(6, 6.0, [5, 10, 20, 40])


def test_fit_input_gates():
    with pytest.raises(DomainError):
        bethe.strong_coupling_fit(6, 6.0, [100, 200, 400])
    with pytest.raises(DomainError):  # duplicates collapse before the count
        bethe.strong_coupling_fit(6, 6.0, [100, 100.0, 200, 400])
    with pytest.raises(DomainError):
        bethe.strong_coupling_fit(6, 6.0, [-1, 100, 200, 400])
