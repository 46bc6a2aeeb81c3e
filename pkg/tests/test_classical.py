import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pu_oscillator import classical
from pu_oscillator.classical import (ClassicalState, JetState, NormalModeState, SingularTransformation,
                                     degenerate_mode_map, hamiltonian_degenerate, hamiltonian_normal,
                                     hamiltonian_ostrogradski, kernel_coefficients, normal_mode_map,
                                     ostrogradski_state)
from pu_oscillator.core import OscillatorParams, frequency_squares, params_from_epsilon

finite = st.floats(-10, 10, allow_nan=False)


def test_ostrogradski_examples():
    p1 = OscillatorParams(lam=0.15)
    assert ostrogradski_state(JetState(1, 0, 0, 0), p1) == ClassicalState(1, 0, 0, 0)
    assert ostrogradski_state(JetState(0, 1, 0, 0), p1) == ClassicalState(0, 1, 1, 0)
    assert ostrogradski_state(JetState(0, 0, 1, 0), OscillatorParams(lam=0.25)) == ClassicalState(0, 0, 0, -0.25)


def test_hamiltonian_examples(params):
    assert hamiltonian_ostrogradski(ClassicalState(0, 0, 0, 0), params) == 0
    assert hamiltonian_ostrogradski(ClassicalState(1, 0, 0, 0), params) == 0.5
    w1s, w2s = frequency_squares(params)
    assert hamiltonian_normal(NormalModeState(1, 0, 0, 0), params) == pytest.approx(-w1s / 2)
    assert hamiltonian_normal(NormalModeState(0, 1, 0, 0), params) == pytest.approx(w2s / 2)


def test_hamiltonian_agrees_with_lagrangian_energy(params):
    # independent oracle: energy function of the Lagrangian evaluated on the jet
    m, w, lam = params.m, params.omega, params.lam
    rng = np.random.default_rng(1)
    for q, qd, qdd, qddd in rng.normal(size=(50, 4)):
        energy = m / 2 * qd**2 + m * w**2 / 2 * q**2 - m * lam / 2 * qdd**2 + m * lam * qd * qddd
        state = ostrogradski_state(JetState(q, qd, qdd, qddd), params)
        assert hamiltonian_ostrogradski(state, params) == pytest.approx(energy, rel=1e-12, abs=1e-14)


def test_maps_symplectic(params):
    assert normal_mode_map(params).symplectic_defect() < 1e-12
    assert degenerate_mode_map(params).symplectic_defect() < 1e-12


def test_singular_at_degenerate_point(deg_params):
    with pytest.raises(SingularTransformation):
        normal_mode_map(deg_params)
    with pytest.raises(SingularTransformation):
        classical.to_normal_modes(ClassicalState(1, 0, 0, 0), deg_params)


@settings(max_examples=200)
@given(finite, finite, finite, finite)
def test_normal_mode_identity(q1, q2, P1, P2):
    p = OscillatorParams(lam=0.15)
    state = ClassicalState(q1, q2, P1, P2)
    modes = classical.to_normal_modes(state, p)
    back = classical.from_normal_modes(modes, p)
    np.testing.assert_allclose(back.as_array(), state.as_array(), rtol=1e-12, atol=1e-12)
    h5 = hamiltonian_ostrogradski(state, p)
    assert hamiltonian_normal(modes, p) == pytest.approx(h5, rel=1e-10, abs=1e-10)


@settings(max_examples=200)
@given(finite, finite, finite, finite)
def test_degenerate_identity(q1, q2, P1, P2):
    p = OscillatorParams(lam=0.25)
    state = ClassicalState(q1, q2, P1, P2)
    modes = classical.to_degenerate_modes(state, p)
    np.testing.assert_allclose(classical.from_degenerate_modes(modes, p).as_array(), state.as_array(),
                               rtol=1e-12, atol=1e-12)
    assert hamiltonian_degenerate(modes, p) == pytest.approx(hamiltonian_ostrogradski(state, p), rel=1e-10,
                                                             abs=1e-10)


def test_condition_number_diverges_like_inverse_epsilon():
    eps = np.geomspace(1e-3, 1e-1, 5)
    cond = [np.linalg.cond(normal_mode_map(params_from_epsilon(epsilon=e)).matrix) for e in eps]
    assert cond[0] > 1e3
    assert np.polyfit(np.log(eps), np.log(cond), 1)[0] == pytest.approx(-1.0, abs=0.05)


def test_kernel_coefficients(params):
    b1, b2 = kernel_coefficients(params)
    assert b1 + b2 == pytest.approx(math.sqrt(2) * params.m, rel=1e-14)
    np.testing.assert_allclose(classical.composed_momentum_rows(params), classical.kernel_momentum_rows(params),
                               rtol=1e-12, atol=1e-12)


def test_kernel_coefficients_first_order_is_exact():
    # lam w1^2 = (1 + eps)/2 exactly, so b1 = (m/sqrt2)(1 + eps/4) with no O(eps^2) remainder
    for eps in (0.1, 0.01, 0.001):
        b1, b2 = kernel_coefficients(params_from_epsilon(epsilon=eps))
        assert b1 == pytest.approx((1 + eps / 4) / math.sqrt(2), rel=1e-12)
        assert b2 == pytest.approx((1 - eps / 4) / math.sqrt(2), rel=1e-12)


def test_kernel_coefficients_rejected_at_degenerate_point(deg_params):
    with pytest.raises(ValueError):
        kernel_coefficients(deg_params)


def test_rk4_pure_mode(params):
    w1, w2 = (math.sqrt(v) for v in frequency_squares(params))
    dt = 2 * math.pi / w1 / 1000
    traj = classical.integrate_eom(JetState(1, 0, -w1**2, 0), params, 10 * 2 * math.pi / w2, dt, stride=20)
    assert np.abs(traj.jets[:, 0] - np.cos(w1 * traj.t)).max() < 1e-6


def test_rk4_zero_jet(params):
    traj = classical.integrate_eom(JetState(0, 0, 0, 0), params, 5.0, 0.01)
    assert not np.any(traj.jets)


def test_closed_form_satisfies_eom(params):
    # the fourth derivative from a finite difference of q''' must equal -(q'' + w^2 q)/lam
    jet = JetState(0.3, -1.2, 0.7, 2.0)
    t = np.linspace(0, 5, 11)
    h = 1e-4
    qddd_plus = classical.closed_form_solution(jet, params, t + h)[:, 3]
    qddd_minus = classical.closed_form_solution(jet, params, t - h)[:, 3]
    y = classical.closed_form_solution(jet, params, t)
    q4 = (qddd_plus - qddd_minus) / (2 * h)
    np.testing.assert_allclose(q4, -(y[:, 2] + params.omega**2 * y[:, 0]) / params.lam, rtol=1e-6, atol=1e-6)


def test_degenerate_closed_form_secular(deg_params):
    jet = JetState(1.0, 0.5, -0.2, 0.1)
    w0 = math.sqrt(2)
    dt = 2 * math.pi / w0 / 1000
    traj = classical.integrate_eom(jet, deg_params, 10 * 2 * math.pi / w0, dt, stride=10)
    assert (np.abs(traj.jets - traj.exact).max(axis=1) / (1 + traj.t)).max() < 1e-6


def test_unstable_regime_rejected():
    with pytest.raises(ValueError):
        classical.integrate_eom(JetState(1, 0, 0, 0), OscillatorParams(lam=1.0), 1.0, 0.01)


def test_trajectory_csv(tmp_path, params):
    traj = classical.integrate_eom(JetState(1, 0, 0, 0), params, 1.0, 0.01, stride=10)
    path = tmp_path / "traj.csv"
    traj.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,q,qd,qdd,qddd,H"
    assert len(lines) == len(traj.t) + 1
