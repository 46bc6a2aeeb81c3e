"""Oscillator parameters, regime classification and the two characteristic frequencies."""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

DEGENERATE_ATOL = 1e-14


class Regime(enum.Enum):
    COMPLEX_PAIR = "ComplexPair"
    REAL_DISTINCT = "RealDistinct"
    DEGENERATE = "Degenerate"
    MIXED_REAL_IMAGINARY = "MixedRealImaginary"


class RegimeError(ValueError):
    """Raised when an operation is called outside the regime it is defined for."""


@dataclass(frozen=True)
class OscillatorParams:
    """Constants of one Pais-Uhlenbeck oscillator ``L = m/2 q'^2 - m w^2/2 q^2 - m lam/2 q''^2``."""

    m: float = 1.0
    omega: float = 1.0
    lam: float = 0.15
    hbar: float = 1.0

    def __post_init__(self):
        for name in ("m", "omega", "hbar"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if not math.isfinite(self.lam):
            raise ValueError(f"lam must be finite, got {self.lam!r}")
        if self.lam == 0:
            raise ValueError("lam = 0 reduces the equation of motion to second order")

    @property
    def discriminant(self) -> float:
        """``1 - 4 lam omega^2``; equals epsilon^2 on the near-degenerate family."""
        return 1.0 - 4.0 * self.lam * self.omega**2

    @property
    def epsilon(self) -> float:
        d = self.discriminant
        if d < 0:
            raise RegimeError("epsilon is only defined for lam <= 1/(4 omega^2)")
        return math.sqrt(d)


@dataclass(frozen=True)
class FrequencyPair:
    omega1: complex | float
    omega2: complex | float

    @property
    def is_real(self) -> bool:
        return isinstance(self.omega1, float) and isinstance(self.omega2, float)


def classify_regime(params: OscillatorParams, atol: float = DEGENERATE_ATOL) -> Regime:
    if params.lam < 0:
        return Regime.MIXED_REAL_IMAGINARY
    d = params.discriminant
    if abs(d) <= atol:
        return Regime.DEGENERATE
    if d < 0:
        return Regime.COMPLEX_PAIR
    return Regime.REAL_DISTINCT


def frequency_squares(params: OscillatorParams, atol: float = DEGENERATE_ATOL):
    """Return ``(omega1^2, omega2^2)``, complex when the discriminant is negative."""
    d = params.discriminant
    if params.lam > 0 and abs(d) <= atol:
        d = 0.0
    root = math.sqrt(d) if d >= 0 else cmath.sqrt(d)
    two_lam = 2.0 * params.lam
    return (1.0 + root) / two_lam, (1.0 - root) / two_lam


def frequencies(params: OscillatorParams, atol: float = DEGENERATE_ATOL) -> FrequencyPair:
    """Both frequencies from the quartic characteristic equation.

    Real floats are returned where both squares are non-negative reals, otherwise
    principal complex square roots.
    """
    w1s, w2s = frequency_squares(params, atol)

    def root(z):
        if isinstance(z, float) and z >= 0:
            return math.sqrt(z)
        return cmath.sqrt(z)

    return FrequencyPair(root(w1s), root(w2s))


def real_frequencies(params: OscillatorParams) -> tuple[float, float]:
    """``(omega1, omega2)`` for the RealDistinct or Degenerate regime."""
    regime = classify_regime(params)
    if regime not in (Regime.REAL_DISTINCT, Regime.DEGENERATE):
        raise RegimeError(f"real frequencies need a stable regime, got {regime.value}")
    pair = frequencies(params)
    return pair.omega1, pair.omega2


def require_regime(params: OscillatorParams, *allowed: Regime) -> Regime:
    regime = classify_regime(params)
    if regime not in allowed:
        names = ", ".join(r.value for r in allowed)
        raise RegimeError(f"expected regime in {{{names}}}, got {regime.value}")
    return regime


def params_from_epsilon(m: float = 1.0, omega: float = 1.0, hbar: float = 1.0, epsilon: float = 0.1) -> OscillatorParams:
    """Near-degenerate member with ``1 - 4 lam omega^2 = epsilon^2``."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    return OscillatorParams(m=m, omega=omega, lam=(1.0 - epsilon**2) / (4.0 * omega**2), hbar=hbar)


def degenerate_params(m: float = 1.0, omega: float = 1.0, hbar: float = 1.0) -> OscillatorParams:
    return OscillatorParams(m=m, omega=omega, lam=1.0 / (4.0 * omega**2), hbar=hbar)


def epsilon_expansion(params: OscillatorParams, epsilon: float) -> tuple[float, float]:
    """First-order approximation ``sqrt(2) omega (1 +- epsilon/2)`` of the two frequencies."""
    base = math.sqrt(2.0) * params.omega
    return base * (1.0 + epsilon / 2.0), base * (1.0 - epsilon / 2.0)
