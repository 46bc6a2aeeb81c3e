import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from pu_oscillator import wavefn
from pu_oscillator.classical import kernel_coefficients
from pu_oscillator.core import OscillatorParams, RegimeError, frequency_squares, params_from_epsilon
from pu_oscillator.spectra import DegenerateLabel, QuantumNumbers, limit_schedule


# --- independent oracles ----------------------------------------------------------------


def oscillator_oracle(n, w, x, p):
    a = math.sqrt(p.m * w / p.hbar)
    norm = (p.m * w / (math.pi * p.hbar)) ** 0.25 / math.sqrt(2.0**n * math.factorial(n))
    return norm * special.eval_hermite(n, a * x) * math.exp(-a * a * x * x / 2)


def coord_oracle(n1, n2, x1, x2, p):
    w1s, w2s = frequency_squares(p)
    return oscillator_oracle(n1, math.sqrt(w1s), x1, p) * oscillator_oracle(n2, math.sqrt(w2s), x2, p)


def momentum_oracle(n1, n2, P1, P2, p):
    """Direct adaptive integration of the kernel along the delta-function line."""
    w1s, w2s = frequency_squares(p)
    b1, b2 = kernel_coefficients(p)
    B = b1 * b1 + b2 * b2
    root = math.sqrt(p.lam * (w1s - w2s))
    u = root / (math.sqrt(2) * p.omega) * P2
    kappa = p.m * root / (p.hbar * B)
    C = math.sqrt(p.m * p.lam * (w1s - w2s) / (2 * math.sqrt(2) * math.pi * p.hbar * p.omega))

    def g(w):
        return coord_oracle(n1, n2, (b2 * w - b1 * u) / B, (b1 * w + b2 * u) / B, p)

    re = integrate.quad(lambda w: g(w) * math.cos(kappa * P1 * w), -np.inf, np.inf, limit=400)[0]
    im = integrate.quad(lambda w: -g(w) * math.sin(kappa * P1 * w), -np.inf, np.inf, limit=400)[0]
    return C / B * (re + 1j * im)


def dominant_oracle(n1, n2, P1, P2, eps, p):
    """Leading-order integral with complex Hermite arguments, integrated adaptively."""
    sigma = math.sqrt(eps / (2 * math.sqrt(2) * p.m * p.hbar * p.omega))
    c1 = np.zeros(n1 + 1)
    c1[-1] = 1
    c2 = np.zeros(n2 + 1)
    c2[-1] = 1
    s1, s2 = sigma * (P2 + 1j * P1), sigma * (-P2 + 1j * P1)

    def f(y):
        return np.polynomial.hermite.hermval(y - s1, c1) * np.polynomial.hermite.hermval(y - s2, c2) * np.exp(-y * y)

    re = integrate.quad(lambda y: f(y).real, -np.inf, np.inf, limit=200)[0]
    im = integrate.quad(lambda y: f(y).imag, -np.inf, np.inf, limit=200)[0]
    norm = 1 / math.sqrt(math.sqrt(math.pi) * 2.0**n1 * math.factorial(n1) * math.sqrt(math.pi) * 2.0**n2
                         * math.factorial(n2))
    return norm * math.sqrt(eps) / (math.sqrt(math.pi) * math.sqrt(math.sqrt(2) * p.m * p.hbar * p.omega)) * (re + 1j * im)


# --- coordinate representation -------------------------------------------------------------


@pytest.mark.parametrize("n1,n2", [(0, 0), (1, 0), (2, 3), (7, 4)])
def test_coord_matches_oracle(params, n1, n2):
    xs = [(0.3, -0.4), (-1.2, 0.8), (2.0, 1.5)]
    for x1, x2 in xs:
        got = wavefn.coord_wavefunction(QuantumNumbers(n1, n2), x1, x2, params)
        assert got == pytest.approx(coord_oracle(n1, n2, x1, x2, params), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("n1,n2", [(0, 0), (1, 2), (4, 3), (6, 6)])
def test_coord_residual_is_truncation_error(params, n1, n2):
    rep = wavefn.coord_residual(QuantumNumbers(n1, n2), params)
    assert rep.extrapolated <= 1e-8
    assert rep.order == pytest.approx(2.0, abs=0.05)


def test_mixed_frequency_form_is_not_an_eigenfunction(params):
    qn = QuantumNumbers(1, 2)
    x = np.linspace(-1, 1, 5)
    assert not np.allclose(wavefn.coord_wavefunction(qn, x, x, params),
                           wavefn.coord_wavefunction(qn, x, x, params, mixed_frequency=True))


def test_coord_orthonormal(params):
    assert wavefn.coord_overlap_defect(10, params) <= 1e-12


def test_coord_requires_real_distinct(deg_params):
    with pytest.raises(RegimeError):
        wavefn.coord_wavefunction(QuantumNumbers(0, 0), 0.0, 0.0, deg_params)


# --- kernel -----------------------------------------------------------------------------------


@pytest.mark.parametrize("lam", [0.05, 0.15, 0.24])
def test_kernel_eigen_relations(lam):
    p = OscillatorParams(lam=lam)
    ker = wavefn.transition_kernel(p)
    assert ker.momentum_eigenvalue_factor(p) == pytest.approx(1.0, rel=1e-12)
    assert ker.delta_annihilated() == pytest.approx(0.0, abs=1e-12)


def test_smeared_kernel_peaks_on_constraint(params):
    ker = wavefn.transition_kernel(params)
    c1, c2, cP2 = ker.delta_coeffs
    P2 = 0.8
    x2 = 0.0
    x1 = -cP2 * P2 / c1
    on = abs(ker(x1, x2, 0.0, P2, 0.05))
    off = abs(ker(x1 + 0.5, x2, 0.0, P2, 0.05))
    assert on > 1e3 * off


# --- exact momentum representation -----------------------------------------------------------


@pytest.mark.parametrize("n1,n2,P1,P2", [(0, 0, 0.3, 0.2), (1, 2, 0.7, -1.1), (3, 1, -2.0, 0.5), (5, 5, 1.0, 1.0)])
def test_exact_momentum_matches_direct_integral(params, n1, n2, P1, P2):
    got = wavefn.momentum_wavefunction_exact(QuantumNumbers(n1, n2), P1, P2, params)
    assert abs(got - momentum_oracle(n1, n2, P1, P2, params)) <= 1e-12


@pytest.mark.parametrize("n1,n2", [(0, 0), (1, 2)])
def test_exact_momentum_normalised(params, n1, n2):
    g = np.linspace(-20, 20, 161)
    P1, P2 = np.meshgrid(g, g, indexing="ij")
    v = wavefn.momentum_wavefunction_exact(QuantumNumbers(n1, n2), P1, P2, params)
    assert (np.abs(v) ** 2).sum() * (g[1] - g[0]) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_exact_rejects_large_labels(params):
    with pytest.raises(ValueError):
        wavefn.momentum_wavefunction_exact(QuantumNumbers(201, 0), 0.0, 0.0, params)


def test_exact_vs_leading_order_small_epsilon():
    eps = 1e-3
    p = params_from_epsilon(epsilon=eps)
    g = np.linspace(-5, 5, 11)
    P1, P2 = np.meshgrid(g, g, indexing="ij")
    qn = QuantumNumbers(3, 3)
    exact = wavefn.momentum_wavefunction_exact(qn, P1, P2, p)
    dom = wavefn.momentum_wavefunction_dominant(qn, P1, P2, eps, p)
    assert wavefn.shape_error(np.abs(exact), np.abs(dom))[0] <= 1e-2


# --- leading-order and closed forms ----------------------------------------------------------


@pytest.mark.parametrize("n1,n2,P1,P2", [(0, 0, 1.0, 2.0), (2, 5, -3.0, 4.0), (6, 1, 5.0, -2.0)])
def test_dominant_matches_complex_quadrature(params, n1, n2, P1, P2):
    eps = 0.05
    got = wavefn.momentum_wavefunction_dominant(QuantumNumbers(n1, n2), P1, P2, eps, params)
    want = dominant_oracle(n1, n2, P1, P2, eps, params)
    assert abs(got - want) <= 1e-10 * max(abs(want), 1e-3)


def test_direct_and_shifted_contours_agree(params):
    qn = QuantumNumbers(3, 4)
    P = np.linspace(-2, 2, 7)
    a = wavefn.momentum_wavefunction_dominant(qn, P, P[::-1], 0.01, params)
    b = wavefn.momentum_wavefunction_dominant(qn, P, P[::-1], 0.01, params, contour_shift=False)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-14)


def test_direct_contour_rejects_too_few_nodes(params):
    with pytest.raises(wavefn.QuadratureError):
        wavefn.momentum_wavefunction_dominant(QuantumNumbers(10, 10), 0.0, 0.0, 0.01, params,
                                              contour_shift=False, K=5)


def test_dominant_rejects_large_epsilon(params):
    with pytest.raises(ValueError):
        wavefn.momentum_wavefunction_dominant(QuantumNumbers(0, 0), 0.0, 0.0, 0.5, params)


def test_ground_state_is_constant(params):
    eps = 0.01
    P = np.linspace(-10, 10, 9)
    v = wavefn.momentum_wavefunction_closed(QuantumNumbers(0, 0), P, P, eps, params)
    want = math.sqrt(eps) / (math.sqrt(math.pi) * math.sqrt(math.sqrt(2)))
    np.testing.assert_allclose(v, want, rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 12), st.integers(0, 12), st.floats(-2.5, 2.5), st.floats(-2.5, 2.5),
       st.sampled_from([0.1, 0.01, 0.001]))
def test_dominant_equals_closed(n1, n2, s1, s2, eps):
    p = OscillatorParams(lam=0.15)
    sigma = wavefn.leading_scale(eps, p)
    qn = QuantumNumbers(n1, n2)
    a = wavefn.momentum_wavefunction_dominant(qn, s1 / sigma, s2 / sigma, eps, p)
    b = wavefn.momentum_wavefunction_closed(qn, s1 / sigma, s2 / sigma, eps, p)
    scale = abs(wavefn.momentum_wavefunction_closed(qn, 1 / sigma, 0.5 / sigma, eps, p)) + abs(b)
    assert abs(a - b) <= 1e-9 * scale


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 15), st.integers(0, 15), st.floats(-20, 20), st.floats(-20, 20))
def test_closed_form_mode_swap(n1, n2, P1, P2):
    p = OscillatorParams(lam=0.15)
    a = wavefn.momentum_wavefunction_closed(QuantumNumbers(n1, n2), P1, P2, 0.01, p)
    b = wavefn.momentum_wavefunction_closed(QuantumNumbers(n2, n1), P1, -P2, 0.01, p)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_dominant_table_matches_single_calls(params):
    eps = 0.01
    g = np.linspace(-15, 15, 5)
    P1, P2 = np.meshgrid(g, g, indexing="ij")
    table = wavefn.dominant_table(6, P1, P2, eps, params)
    for a, b in [(0, 0), (2, 5), (6, 3)]:
        single = wavefn.momentum_wavefunction_dominant(QuantumNumbers(a, b), P1, P2, eps, params)
        np.testing.assert_allclose(table[a, b], single, rtol=1e-10, atol=1e-14)


def test_closed_form_radial_when_labels_equal(params):
    theta = np.linspace(0, 2 * math.pi, 9)
    v = wavefn.momentum_wavefunction_closed(QuantumNumbers(4, 4), 7 * np.cos(theta), 7 * np.sin(theta), 0.01, params)
    np.testing.assert_allclose(v, v[0], rtol=1e-12)


@pytest.mark.parametrize("n1,n2", [(0, 1), (3, 5), (4, 1)])
def test_closed_form_vanishes_at_origin(params, n1, n2):
    assert wavefn.momentum_wavefunction_closed(QuantumNumbers(n1, n2), 0.0, 0.0, 0.01, params) == 0


def test_origin_value_scales_as_sqrt_epsilon(params):
    qn = QuantumNumbers(5, 5)
    a = wavefn.momentum_wavefunction_closed(qn, 0.0, 0.0, 0.04, params)
    b = wavefn.momentum_wavefunction_closed(qn, 0.0, 0.0, 0.01, params)
    assert abs(b / a) == pytest.approx(0.5, rel=1e-12)


def test_closed_log_handles_huge_labels(params):
    log_mod, phase = wavefn.momentum_wavefunction_closed_log(QuantumNumbers(200000, 200003), 0.0, 1.0, 1e-6, params)
    assert np.isfinite(log_mod) and np.isfinite(phase)


# --- degenerate continuum and the limit --------------------------------------------------------


@pytest.mark.parametrize("n,k", [(0, 1.0), (1, 0.5), (-2, 1.5), (3, 2.0)])
def test_degenerate_residual(deg_params, n, k):
    rep = wavefn.degenerate_residual(DegenerateLabel(n, k), deg_params)
    assert rep.extrapolated <= 1e-8
    assert rep.order == pytest.approx(2.0, abs=0.05)


@given(st.integers(1, 8), st.floats(0.1, 3.0), st.floats(0.0, 10.0), st.floats(0.0, 6.3))
def test_bessel_mirror_is_conjugate(n, k, P, T):
    a = wavefn.degenerate_wavefunction(DegenerateLabel(n, k), P, T)
    b = wavefn.degenerate_wavefunction(DegenerateLabel(-n, k), P, T)
    assert b == pytest.approx((-1) ** n * np.conj(a), rel=1e-12, abs=1e-14)


def test_polar_momentum():
    pm = wavefn.PolarMomentum(2.0, math.pi / 2)
    assert pm.cartesian == pytest.approx((0.0, 2.0), abs=1e-15)
    with pytest.raises(ValueError):
        wavefn.PolarMomentum(-1.0, 0.0)


def test_limit_scan_converges(params):
    sched = limit_schedule(2, 1.0, params, 6)
    rows = wavefn.limit_scan(sched, params)
    errs = [r.sup_err for r in rows]
    assert wavefn.is_monotone_decreasing(errs)
    assert errs[-1] < 0.1 * errs[0]
    assert max(r.phase_err for r in rows) <= 1e-10


def test_prefactor_slope(params):
    assert wavefn.prefactor_slope(1, 1.0, params) == pytest.approx(0.5, abs=0.02)


def test_scan_csv(tmp_path, params):
    rows = wavefn.limit_scan(limit_schedule(0, 1.0, params, 3), params)
    path = tmp_path / "scan.csv"
    wavefn.write_scan_csv(rows, path, header=["lambda=0.15"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# lambda=0.15"
    assert lines[1].startswith("n1,n2,epsilon")
    assert len(lines) == 2 + len(rows)
    assert float(lines[2].split(",")[3]) == rows[0].sup_err


def test_loglog_slope_exact():
    x = np.array([1.0, 2.0, 4.0])
    assert wavefn.fit_loglog_slope(x, 3 * x**-1.5) == pytest.approx(-1.5)
