"""Connection-matrix algebra: constructors, classification, jump readout."""

import json
import math

import pytest
from hypothesis import given, strategies as st

from pointjump.errors import NotUnimodular, WallVariant
from pointjump.pointlike import (
    Classification,
    InteractionMatrix,
    SeparatedWall,
    apply_connection,
    classify,
    derivative_jump_matrix,
    general_symmetric_matrix,
    hardcore_matrix,
    jump_parameters,
    value_jump_matrix,
)

# bounded away from 0 so the inversion formulas keep their significance;
# near-cancellation cases get their own explicit tests
finite = st.floats(min_value=1e-3, max_value=50.0).flatmap(
    lambda v: st.sampled_from([v, -v]))


def test_unimodularity_enforced():
    with pytest.raises(NotUnimodular):
        InteractionMatrix(1.0, 1.0, 1.0, 1.0)
    # and the constructors always satisfy it
    derivative_jump_matrix(3.7)
    value_jump_matrix(-0.2)
    hardcore_matrix(1.1)


def test_hardcore_effective_strength():
    # the matrix parameter is q, but acting on continuous-derivative data
    # the value jump it enforces is 1/q
    assert jump_parameters(hardcore_matrix(0.5)).beta == pytest.approx(2.0, abs=0)
    assert jump_parameters(hardcore_matrix(4.0)).beta == pytest.approx(0.25)
    assert jump_parameters(hardcore_matrix(0.5)).gamma == math.inf


def test_value_jump_action():
    m = value_jump_matrix(0.7)
    psi_p, dpsi_p = apply_connection(m, 1.0, 2.0)
    assert dpsi_p == 2.0                      # derivative continuous
    assert psi_p - 1.0 == pytest.approx(2.0 * 0.7 * 2.0)
    jp = jump_parameters(m)
    assert jp.beta == pytest.approx(0.7)
    assert jp.gamma == 0.0


def test_derivative_jump_action():
    m = derivative_jump_matrix(1.3)
    psi_p, dpsi_p = apply_connection(m, 0.5, -0.1)
    assert psi_p == 0.5
    assert dpsi_p - (-0.1) == pytest.approx(2.0 * 1.3 * 0.5)
    jp = jump_parameters(m)
    assert jp.gamma == pytest.approx(1.3)
    assert jp.beta == 0.0


@given(gamma=finite, beta=finite)
def test_general_symmetric_round_trip(gamma, beta):
    if abs(1.0 - gamma * beta) < 1e-6:
        return  # separated limit, no finite matrix
    m = general_symmetric_matrix(gamma, beta)
    assert m.a == m.d
    jp = jump_parameters(m)
    assert math.isclose(jp.gamma, gamma, rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(jp.beta, beta, rel_tol=1e-9, abs_tol=1e-9)


@given(g1=finite, g2=finite, b1=finite, b2=finite)
def test_composition_stays_unimodular(g1, g2, b1, b2):
    m = derivative_jump_matrix(g1) @ value_jump_matrix(b1) \
        @ derivative_jump_matrix(g2) @ value_jump_matrix(b2)
    det = m.a * m.d - m.b * m.c
    scale = max(1.0, abs(m.a * m.d) + abs(m.b * m.c))
    assert abs(det - 1.0) <= 1e-12 * scale


@given(gamma=finite, beta=finite)
def test_inverse_is_two_sided(gamma, beta):
    if abs(1.0 - gamma * beta) < 1e-6:
        return  # separated limit, no finite matrix
    m = general_symmetric_matrix(gamma, beta)
    left = m.inverse() @ m
    assert math.isclose(left.a, 1.0, abs_tol=1e-9)
    assert math.isclose(left.d, 1.0, abs_tol=1e-9)
    assert abs(left.b) < 1e-9 and abs(left.c) < 1e-9


def test_jump_parameters_pole_cases():
    # a = -1, b = 0: beta from the action -2/c
    jp = jump_parameters(InteractionMatrix(-1.0, 0.0, 3.0, -1.0))
    assert jp.beta == pytest.approx(-2.0 / 3.0)
    # b = 0, a = 1: genuine derivative-jump family
    jp = jump_parameters(InteractionMatrix(1.0, 0.0, 5.0, 1.0))
    assert jp.gamma == pytest.approx(2.5)
    # a = -1 with b != 0: no finite value jump
    jp = jump_parameters(InteractionMatrix(-1.0, 2.0, -0.25, -0.5))
    assert jp.beta == math.inf


def test_classification_precedence():
    assert classify(derivative_jump_matrix(2.0)).tag == "derivative_jump"
    assert classify(value_jump_matrix(0.3)).tag == "value_jump"
    assert classify(hardcore_matrix(1.0)).tag != "value_jump"
    c = classify(general_symmetric_matrix(0.4, 0.7))
    assert c.tag == "general_symmetric"
    assert c.gamma == pytest.approx(0.4)
    # identity is the two-parameter family's origin, not a one-parameter member
    ident = InteractionMatrix(1.0, 0.0, 0.0, 1.0)
    assert classify(ident).tag == "general_symmetric"
    assert classify(SeparatedWall(1.0, -2.0)).tag == "separated_wall"


def test_separated_wall_refuses_connection():
    wall = SeparatedWall(h_plus=0.0, h_minus=1.0)
    with pytest.raises(WallVariant):
        apply_connection(wall, 1.0, 0.0)
    with pytest.raises(WallVariant):
        jump_parameters(wall)
    assert wall.boundary_residual(2.0, 2.0, "minus") == 0.0


def test_phase_round_trip_through_json():
    m = InteractionMatrix(2.0, 1.5, 2.0, 2.0, theta=0.25)
    m2 = InteractionMatrix.from_json(m.to_json())
    assert m2 == m
    assert json.loads(m.to_json())["theta"] == 0.25


def test_phase_only_multiplies():
    m = InteractionMatrix(1.0, 0.0, 0.0, 1.0, theta=math.pi / 3.0)
    psi_p, dpsi_p = apply_connection(m, 1.0, 0.0)
    assert isinstance(psi_p, complex)
    assert abs(psi_p) == pytest.approx(1.0)
    assert psi_p.real == pytest.approx(0.5)
    # the jump parameters ignore the phase: they are ratios
    assert jump_parameters(m).beta == 0.0
