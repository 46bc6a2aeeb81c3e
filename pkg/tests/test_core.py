import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pu_oscillator.core import (OscillatorParams, Regime, RegimeError, classify_regime, epsilon_expansion,
                                frequencies, frequency_squares, params_from_epsilon, real_frequencies)


def roots_oracle(lam, omega):
    """Frequencies from the characteristic polynomial lam s^2 - s + omega^2 = 0 in s = w^2."""
    s = np.roots([lam, -1.0, omega**2])
    return np.sqrt(np.sort(s.astype(complex))[::-1])


def test_regime_examples():
    assert classify_regime(OscillatorParams(lam=0.25)) is Regime.DEGENERATE
    assert classify_regime(OscillatorParams(lam=0.15)) is Regime.REAL_DISTINCT
    assert classify_regime(OscillatorParams(lam=-1.0)) is Regime.MIXED_REAL_IMAGINARY
    assert classify_regime(OscillatorParams(lam=1.0)) is Regime.COMPLEX_PAIR


def test_degenerate_frequencies_exact():
    pair = frequencies(OscillatorParams(lam=0.25))
    assert pair.omega1 == pair.omega2 == math.sqrt(2)


def test_degenerate_tolerance_is_on_discriminant():
    p = OscillatorParams(lam=0.25 - 1e-16)
    assert classify_regime(p) is Regime.DEGENERATE
    assert classify_regime(p, atol=0.0) is Regime.REAL_DISTINCT


def test_frequencies_match_polynomial_roots():
    w = frequencies(OscillatorParams(lam=0.15))
    oracle = roots_oracle(0.15, 1.0).real
    assert w.omega1 == pytest.approx(oracle[0], rel=1e-13)
    assert w.omega2 == pytest.approx(oracle[1], rel=1e-13)
    assert w.omega1 == pytest.approx(2.332706, abs=1e-6)
    assert w.omega2 == pytest.approx(1.106864, abs=1e-6)


def test_mixed_regime_has_one_imaginary_frequency():
    w = frequencies(OscillatorParams(lam=-0.25))
    assert isinstance(w.omega1, complex) or isinstance(w.omega2, complex)
    reals = [z for z in (w.omega1, w.omega2) if isinstance(z, float) or abs(complex(z).imag) < 1e-15]
    assert len(reals) == 1
    assert not w.is_real


def test_lambda_zero_rejected():
    with pytest.raises(ValueError):
        OscillatorParams(lam=0.0)


@pytest.mark.parametrize("field", ["m", "omega", "hbar"])
def test_nonpositive_constants_rejected(field):
    with pytest.raises(ValueError):
        OscillatorParams(**{field: -1.0})


@given(st.floats(-50, 50).filter(lambda x: abs(x) > 1e-6), st.floats(0.1, 10))
def test_vieta_identities(lam, omega):
    p = OscillatorParams(omega=omega, lam=lam)
    a, b = frequency_squares(p)
    assert abs((a + b) * lam - 1) <= 1e-12 * max(1, abs(a * lam), abs(b * lam))
    assert abs(a * b * lam / omega**2 - 1) <= 1e-12


def test_params_from_epsilon():
    p = params_from_epsilon(1.0, 1.0, 1.0, 0.2)
    assert p.lam == pytest.approx(0.24, rel=1e-15)
    assert p.epsilon == pytest.approx(0.2, rel=1e-12)
    w1, _ = real_frequencies(p)
    assert w1 == pytest.approx(1.581139, abs=1e-6)
    assert epsilon_expansion(p, 0.2)[0] == pytest.approx(1.555635, abs=1e-6)
    assert abs(w1 - epsilon_expansion(p, 0.2)[0]) <= 0.2**2


@pytest.mark.parametrize("eps", [0.0, 1.0, -0.1, 1.5])
def test_params_from_epsilon_range(eps):
    with pytest.raises(ValueError):
        params_from_epsilon(1.0, 1.0, 1.0, eps)


@given(st.floats(1e-6, 1 - 1e-6))
def test_epsilon_family_is_real_distinct(eps):
    assert classify_regime(params_from_epsilon(epsilon=eps)) is Regime.REAL_DISTINCT


def test_expansion_error_slope_two():
    eps = np.array([0.1, 0.01, 0.001])
    gaps = []
    for e in eps:
        p = params_from_epsilon(epsilon=e)
        w1, w2 = real_frequencies(p)
        a1, a2 = epsilon_expansion(p, e)
        assert abs(w1 - a1) <= e**2 and abs(w2 - a2) <= e**2
        gaps.append(abs(w1 - a1))
    slope = np.polyfit(np.log(eps), np.log(gaps), 1)[0]
    assert slope == pytest.approx(2.0, abs=0.05)


def test_real_frequencies_rejects_unstable():
    with pytest.raises(RegimeError):
        real_frequencies(OscillatorParams(lam=1.0))
