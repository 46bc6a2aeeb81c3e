"""Eigenfunctions in coordinate and momentum representation and the equal-frequency limit.

Conventions
-----------
Momentum-space functions are ``<P1, P2 | n1, n2>`` with ``P1, P2`` the momenta of the
degenerate-point canonical variables. The coordinate-to-momentum kernel is

    <x1, x2 | P1, P2> = C * delta(-b1 x1 + b2 x2 - s P2) * exp(i kappa P1 (b2 x1 + b1 x2))

with ``s = sqrt(lam (w1^2 - w2^2)) / (sqrt 2 omega)`` and
``kappa = m sqrt(lam (w1^2 - w2^2)) / (hbar (b1^2 + b2^2))``, so
``<P|n> = C/B int dw exp(-i kappa P1 w) psi_n(x(w))`` where ``B = b1^2 + b2^2``.

To leading order in epsilon this reduces to a Hermite-product integral with shifts
``sigma (P2 + i P1)`` and ``sigma (-P2 + i P1)``, ``sigma = sqrt(eps / (2 sqrt2 m hbar omega))``,
and then to the closed Laguerre form. With ``n = n2 - n1 >= 0`` the angular factor is
``(P2 - i P1)^n = (-i)^n P^n exp(i n Theta)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import specfun
from .classical import kernel_coefficients
from .core import OscillatorParams, Regime, RegimeError, frequency_squares, params_from_epsilon, require_regime
from .spectra import (DegenerateLabel, LimitSchedule, QuantumNumbers, energy_degenerate, energy_indefinite,
                      limit_schedule)

SQRT2 = math.sqrt(2.0)
LOG_SQRT_PI = 0.5 * math.log(math.pi)


@dataclass(frozen=True)
class PolarMomentum:
    P: float
    Theta: float

    def __post_init__(self):
        if self.P < 0:
            raise ValueError("radial momentum must be non-negative")

    @property
    def cartesian(self) -> tuple[float, float]:
        return self.P * math.cos(self.Theta), self.P * math.sin(self.Theta)


class QuadratureError(RuntimeError):
    pass


# --- coordinate representation --------------------------------------------------------


def coord_wavefunction(qn: QuantumNumbers, x1, x2, params: OscillatorParams, mixed_frequency: bool = False):
    """Product of oscillator eigenfunctions at frequencies ``omega1`` and ``omega2``.

    ``mixed_frequency=True`` puts ``omega1`` inside the second Hermite argument. That
    function is not an eigenfunction and is kept only as a diagnostic.
    """
    require_regime(params, Regime.REAL_DISTINCT)
    m, hbar = params.m, params.hbar
    w1s, w2s = frequency_squares(params)
    w1, w2 = math.sqrt(w1s), math.sqrt(w2s)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    a1 = math.sqrt(m * w1 / hbar)
    a2 = math.sqrt(m * (w1 if mixed_frequency else w2) / hbar)
    h1, s1 = specfun.hermite_scaled(qn.n1, a1 * x1)
    h2, s2 = specfun.hermite_scaled(qn.n2, a2 * x2)
    log_pref = (specfun.log_hermite_norm(qn.n1) + specfun.log_hermite_norm(qn.n2)
                + 0.25 * math.log(m * m * w1 * w2 / hbar**2))
    expo = log_pref + s1 + s2 - m * (w1 * x1**2 + w2 * x2**2) / (2 * hbar)
    return h1 * h2 * np.exp(expo)


@dataclass(frozen=True)
class ResidualReport:
    """Finite-difference eigen-residuals at spacing ``h`` and ``h/2``.

    ``extrapolated`` uses the Richardson combination ``(4 D(h/2) - D(h)) / 3`` of the
    difference operators; ``order`` is ``log2(plain / half)``, close to 2 when the
    residual is truncation error rather than a wrong eigenvalue.
    """

    h: float
    plain: float
    half: float
    extrapolated: float

    @property
    def order(self) -> float:
        return math.log2(self.plain / self.half)


def _residual_report(apply, h: float) -> ResidualReport:
    r_h, scale = apply(h)
    r_half, _ = apply(h / 2)
    extrap = (4 * r_half - r_h) / 3
    norm = np.abs(scale).max()
    return ResidualReport(h, float(np.abs(r_h).max() / norm), float(np.abs(r_half).max() / norm),
                          float(np.abs(extrap).max() / norm))


def coord_residual(qn: QuantumNumbers, params: OscillatorParams, h: float = 1e-3,
                   half_width: float = 3.0, points: int = 41) -> ResidualReport:
    """Residual of the decoupled Hamiltonian applied by central differences.

    Errors are ``max |H psi - E psi| / max |E psi|`` on a square grid scaled to each
    mode's width.
    """
    m, hbar = params.m, params.hbar
    w1s, w2s = frequency_squares(params)
    E = energy_indefinite(qn, params)
    g = np.linspace(-half_width, half_width, points)
    X1, X2 = np.meshgrid(g / math.sqrt(math.sqrt(w1s)), g / math.sqrt(math.sqrt(w2s)), indexing="ij")

    def psi(a, b):
        return coord_wavefunction(qn, a, b, params)

    centre = psi(X1, X2)

    def apply(step):
        d11 = (psi(X1 + step, X2) - 2 * centre + psi(X1 - step, X2)) / step**2
        d22 = (psi(X1, X2 + step) - 2 * centre + psi(X1, X2 - step)) / step**2
        kinetic = -(hbar**2) / (2 * m)
        h_psi = (kinetic * d22 + m * w2s * X2**2 / 2 * centre) - (kinetic * d11 + m * w1s * X1**2 / 2 * centre)
        return h_psi - E * centre, E * centre

    return _residual_report(apply, h)


def coord_overlap_defect(nmax: int, params: OscillatorParams, nodes: int | None = None) -> float:
    """``max |<n|n'> - delta|`` over all labels with ``n1, n2 <= nmax``.

    Uses a tensor Gauss-Hermite rule in the scaled coordinates ``sqrt(m w_i / hbar) x_i``,
    exact for the polynomial parts up to the degrees involved.
    """
    m, hbar = params.m, params.hbar
    w1s, w2s = frequency_squares(params)
    a1, a2 = math.sqrt(m * math.sqrt(w1s) / hbar), math.sqrt(m * math.sqrt(w2s) / hbar)
    rule = specfun.gauss_hermite(nodes or nmax + 2)
    Y1, Y2 = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    W = np.outer(rule.weights, rule.weights) * np.exp(Y1**2 + Y2**2) / (a1 * a2)
    labels = [QuantumNumbers(i, j) for i in range(nmax + 1) for j in range(nmax + 1)]
    vals = np.array([coord_wavefunction(q, Y1 / a1, Y2 / a2, params).ravel() for q in labels])
    gram = (vals * W.ravel()) @ vals.T
    return float(np.abs(gram - np.eye(len(labels))).max())


# --- degenerate continuum ---------------------------------------------------------------


def degenerate_wavefunction(label: DegenerateLabel, P, Theta):
    """``sqrt(k / 2 pi) J_n(k P) exp(i n Theta)``."""
    P = np.asarray(P, dtype=float)
    radial = math.sqrt(label.k / (2 * math.pi)) * specfun.bessel_j(label.n, label.k * P)
    return radial * np.exp(1j * label.n * np.asarray(Theta, dtype=float))


def degenerate_residual(label: DegenerateLabel, params: OscillatorParams, h: float = 1e-3,
                        P_range: tuple[float, float] = (0.5, 8.0), points: int = 40,
                        theta_samples: int = 7) -> ResidualReport:
    """Residual of the polar-momentum Hamiltonian applied by central differences."""
    require_regime(params, Regime.DEGENERATE)
    m, w, hbar = params.m, params.omega, params.hbar
    E = energy_degenerate(label, params)
    P = np.linspace(*P_range, points)[:, None]
    T = np.linspace(0.0, 2 * math.pi, theta_samples, endpoint=False)[None, :]

    def f(a, b):
        return degenerate_wavefunction(label, a, b)

    c = f(P, T)

    def apply(step):
        dT = (f(P, T + step) - f(P, T - step)) / (2 * step)
        dTT = (f(P, T + step) - 2 * c + f(P, T - step)) / step**2
        dP = (f(P + step, T) - f(P - step, T)) / (2 * step)
        dPP = (f(P + step, T) - 2 * c + f(P - step, T)) / step**2
        h_psi = -1j * SQRT2 * w * hbar * dT + m * w**2 * hbar**2 / 2 * (dPP + dP / P + dTT / P**2)
        return h_psi - E * c, E * c

    return _residual_report(apply, h)


# --- transition kernel --------------------------------------------------------------


@dataclass(frozen=True)
class KernelForm:
    """Coefficients of ``<x1, x2 | P1, P2>``.

    delta argument: ``c1 x1 + c2 x2 + cP2 P2``; phase: ``P1 (d1 x1 + d2 x2)``.
    """

    delta_coeffs: tuple[float, float, float]
    phase_coeffs: tuple[float, float]
    norm: float
    b1: float
    b2: float
    root: float

    def momentum_eigenvalue_factor(self, params: OscillatorParams) -> float:
        """Factor multiplying ``P1`` when the first momentum operator acts on the kernel; must be 1."""
        d1, d2 = self.phase_coeffs
        return params.hbar * (self.b2 * d1 + self.b1 * d2) / (params.m * self.root)

    def delta_annihilated(self) -> float:
        """``(b2 d/dx1 + b1 d/dx2)`` applied to the delta argument; must vanish."""
        c1, c2, _ = self.delta_coeffs
        return self.b2 * c1 + self.b1 * c2

    def __call__(self, x1, x2, P1, P2, width: float):
        """Kernel with the delta function replaced by a normalised Gaussian of ``width``."""
        c1, c2, cP2 = self.delta_coeffs
        d1, d2 = self.phase_coeffs
        arg = c1 * x1 + c2 * x2 + cP2 * P2
        delta = np.exp(-0.5 * (arg / width) ** 2) / (width * math.sqrt(2 * math.pi))
        return self.norm * delta * np.exp(1j * P1 * (d1 * x1 + d2 * x2))


def transition_kernel(params: OscillatorParams) -> KernelForm:
    require_regime(params, Regime.REAL_DISTINCT)
    m, w, hbar, lam = params.m, params.omega, params.hbar, params.lam
    w1s, w2s = frequency_squares(params)
    b1, b2 = kernel_coefficients(params)
    root = math.sqrt(lam * (w1s - w2s))
    B = b1**2 + b2**2
    kappa = m * root / (hbar * B)
    norm = math.sqrt(m * lam * (w1s - w2s) / (2 * SQRT2 * math.pi * hbar * w))
    return KernelForm(
        delta_coeffs=(-b1, b2, -root / (SQRT2 * w)),
        phase_coeffs=(kappa * b2, kappa * b1),
        norm=norm,
        b1=b1,
        b2=b2,
        root=root,
    )


# --- momentum representation --------------------------------------------------------


def _default_nodes(qn: QuantumNumbers, max_freq: float) -> int:
    # degree (n1 + n2) polynomial times exp(-i f y): the oscillation needs ~f^2 extra nodes
    return min(480, (qn.n1 + qn.n2) // 2 + 60 + int(math.ceil(max_freq**2)))


def _hermite_product_integral(qn: QuantumNumbers, c1: float, d1, c2: float, d2, freq, K: int | None,
                              check: bool, rtol: float = 1e-10):
    """``int H_n1(c1 y + d1) H_n2(c2 y + d2) exp(-i freq y) exp(-y^2) dy`` by Gauss-Hermite.

    ``d1, d2, freq`` are real arrays over the evaluation grid. Keeping the Hermite
    arguments real avoids the exponential growth of ``H_n`` along imaginary shifts; the
    price is the oscillatory factor, so ``check=True`` reruns with 32 more nodes and
    raises ``QuadratureError`` if the two disagree.
    """
    d1, d2, freq = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (d1, d2, freq)))
    if K is None:
        K = _default_nodes(qn, float(np.abs(freq).max(initial=0.0)))

    def run(nodes):
        rule = specfun.gauss_hermite(nodes)
        y = rule.nodes.reshape((-1,) + (1,) * d1.ndim)
        wts = rule.weights.reshape(y.shape)
        h1, s1 = specfun.hermite_scaled(qn.n1, c1 * y + d1)
        h2, s2 = specfun.hermite_scaled(qn.n2, c2 * y + d2)
        if np.any(s1) or np.any(s2):
            raise QuadratureError(f"Hermite values overflowed on {nodes} quadrature nodes")
        terms = wts * h1 * h2
        return np.sum(terms * np.exp(-1j * freq * y), axis=0), np.sum(np.abs(terms), axis=0)

    value, _ = run(K)
    if check:
        finer, mass = run(min(512, K + 32))
        # measured against the absolute integrand mass so exact zeros do not fail the check
        scale = np.abs(mass).max(initial=0.0)
        err = np.abs(value - finer).max(initial=0.0)
        if err > rtol * scale:
            raise QuadratureError(f"quadrature not converged with {K} nodes (relative change {err / scale:.2e})")
    return value


def momentum_wavefunction_exact(qn: QuantumNumbers, P1, P2, params: OscillatorParams, K: int | None = None,
                                check: bool = True):
    """Exact ``<P1, P2 | n1, n2>`` away from the degenerate point.

    After completing the square in the remaining integration variable, the real part
    of the shift moves into the Hermite arguments and the imaginary part stays
    behind as an oscillatory factor.
    """
    require_regime(params, Regime.REAL_DISTINCT)
    if qn.n1 > 200 or qn.n2 > 200:
        raise ValueError("quadrature path is limited to n1, n2 <= 200")
    m, hbar = params.m, params.hbar
    w1s, w2s = frequency_squares(params)
    w1, w2 = math.sqrt(w1s), math.sqrt(w2s)
    ker = transition_kernel(params)
    b1, b2 = ker.b1, ker.b2
    B = b1**2 + b2**2
    s = -ker.delta_coeffs[2]
    kappa = ker.phase_coeffs[0] / b2
    P1, P2 = np.broadcast_arrays(np.asarray(P1, dtype=float), np.asarray(P2, dtype=float))
    u = s * P2

    a = m * (w1 * b2**2 + w2 * b1**2) / (2 * hbar * B**2)
    beta_re = m * b1 * b2 * u * (w2 - w1) / (hbar * B**2)
    beta_im = kappa * P1
    gamma = m * (w1 * b1**2 + w2 * b2**2) * u**2 / (2 * hbar * B**2)
    ra = math.sqrt(a)
    # w = y / sqrt(a) - beta_re / (2a)
    al1, al2 = math.sqrt(m * w1 / hbar), math.sqrt(m * w2 / hbar)
    c1, c2 = al1 * b2 / (B * ra), al2 * b1 / (B * ra)
    w0 = -beta_re / (2 * a)
    d1 = al1 * (b2 * w0 - b1 * u) / B
    d2 = al2 * (b1 * w0 + b2 * u) / B
    integral = _hermite_product_integral(qn, c1, d1, c2, d2, beta_im / ra, K, check)

    beta = beta_re + 1j * beta_im
    log_pref = (specfun.log_hermite_norm(qn.n1) + specfun.log_hermite_norm(qn.n2)
                + 0.25 * math.log(m * m * w1 * w2 / hbar**2) + math.log(ker.norm / B) - 0.5 * math.log(a))
    return integral * np.exp(log_pref + (beta**2 + beta_im**2) / (4 * a) - gamma)


def leading_scale(epsilon: float, params: OscillatorParams) -> float:
    """``sigma = sqrt(eps / (2 sqrt2 m hbar omega))``, the momentum scale of the leading-order form."""
    return math.sqrt(epsilon / (2 * SQRT2 * params.m * params.hbar * params.omega))


def _leading_log_prefactor(epsilon: float, params: OscillatorParams) -> float:
    """``ln( sqrt(eps) / sqrt(sqrt2 m hbar omega) )``."""
    return 0.5 * math.log(epsilon) - 0.5 * math.log(SQRT2 * params.m * params.hbar * params.omega)


def momentum_wavefunction_dominant(qn: QuantumNumbers, P1, P2, epsilon: float, params: OscillatorParams,
                                   K: int | None = None, contour_shift: bool = True, check: bool = True):
    """Leading-order momentum wavefunction as a Hermite-product integral.

    ``N(n1) N(n2) sqrt(eps) / (sqrt(pi) sqrt(sqrt2 m hbar omega))
    * int H_n1(y - sigma (P2 + i P1)) H_n2(y - sigma (-P2 + i P1)) exp(-y^2) dy``

    Both Hermite shifts share the imaginary part ``-i sigma P1``. With
    ``contour_shift=True`` the contour moves by ``i sigma P1``, leaving real
    arguments, the factor ``exp(-2 i sigma P1 t)`` and ``exp(sigma^2 P1^2)`` outside.
    ``contour_shift=False`` sums the complex-argument integrand directly. That route
    is exact for polynomials but loses digits quickly once ``sigma |P1|`` grows.
    """
    if not 0 < epsilon <= 0.1:
        raise ValueError("the leading-order form is used for 0 < epsilon <= 0.1")
    sigma = leading_scale(epsilon, params)
    P1, P2 = np.broadcast_arrays(np.asarray(P1, dtype=float), np.asarray(P2, dtype=float))
    log_pref = (specfun.log_hermite_norm(qn.n1) + specfun.log_hermite_norm(qn.n2)
                + _leading_log_prefactor(epsilon, params) - LOG_SQRT_PI)
    if contour_shift:
        integral = _hermite_product_integral(qn, 1.0, -sigma * P2, 1.0, sigma * P2, 2 * sigma * P1, K, check)
        return integral * np.exp(log_pref + (sigma * P1) ** 2)
    need = (qn.n1 + qn.n2) // 2 + 1
    nodes = max(need, 16) if K is None else K
    if nodes < need:
        raise QuadratureError(f"{nodes} nodes cannot integrate degree {qn.n1 + qn.n2} exactly; need {need}")
    rule = specfun.gauss_hermite(nodes)
    y = rule.nodes.reshape((-1,) + (1,) * P1.ndim)
    wts = rule.weights.reshape(y.shape)
    h1, _ = specfun.hermite_scaled(qn.n1, y - sigma * (P2 + 1j * P1))
    h2, _ = specfun.hermite_scaled(qn.n2, y - sigma * (-P2 + 1j * P1))
    return np.sum(wts * h1 * h2, axis=0) * math.exp(log_pref)


def dominant_table(nmax: int, P1, P2, epsilon: float, params: OscillatorParams, K: int | None = None) -> np.ndarray:
    """Leading-order wavefunctions for every ``n1, n2 <= nmax`` at once.

    Shape ``(nmax + 1, nmax + 1) + grid``. Same contour-shifted quadrature as
    ``momentum_wavefunction_dominant``; the Hermite recurrences run once per mode.
    """
    sigma = leading_scale(epsilon, params)
    P1, P2 = np.broadcast_arrays(np.asarray(P1, dtype=float), np.asarray(P2, dtype=float))
    freq = 2 * sigma * P1
    if K is None:
        K = _default_nodes(QuantumNumbers(nmax, nmax), float(np.abs(freq).max(initial=0.0)))
    rule = specfun.gauss_hermite(K)
    y = rule.nodes.reshape((-1,) + (1,) * P1.ndim)
    weight = rule.weights.reshape(y.shape) * np.exp(-1j * freq * y)

    def ladder(arg):
        out = [np.ones(np.broadcast(y, arg).shape), 2 * (y + arg)]
        for k in range(1, nmax):
            out.append(2 * (y + arg) * out[-1] - 2 * k * out[-2])
        return np.array(out[: nmax + 1])

    h1 = ladder(-sigma * P2)
    h2 = ladder(sigma * P2)
    integral = np.einsum("at...,bt...->ab...", h1, h2 * weight[None])
    logs = np.array([specfun.log_hermite_norm(j) for j in range(nmax + 1)])
    pref = np.exp(logs[:, None] + logs[None, :] + _leading_log_prefactor(epsilon, params) - LOG_SQRT_PI)
    return integral * pref.reshape(pref.shape + (1,) * P1.ndim) * np.exp((sigma * P1) ** 2)


def momentum_wavefunction_closed_log(qn: QuantumNumbers, P1, P2, epsilon: float, params: OscillatorParams):
    """Closed Laguerre form as ``(log_modulus, phase)``; usable for n1, n2 up to ~10^6.

    For ``n = n2 - n1 >= 0``:
    ``sqrt(eps)/sqrt(sqrt2 m hbar omega) * sigma^n (P2 - i P1)^n n1! 2^n2 N(n1) N(n2) L^n_n1(2 sigma^2 P^2)``.
    For ``n < 0`` the roles of the modes swap, giving ``(-(P2 + i P1))^|n| n2! 2^n1 L^|n|_n2``.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    sigma = leading_scale(epsilon, params)
    P1 = np.asarray(P1, dtype=float)
    P2 = np.asarray(P2, dtype=float)
    n = qn.n2 - qn.n1
    if n >= 0:
        low, high, angular = qn.n1, qn.n2, P2 - 1j * P1
    else:
        low, high, angular = qn.n2, qn.n1, -(P2 + 1j * P1)
    order = abs(n)
    lag, lag_scale = specfun.laguerre_scaled(low, order, 2 * sigma**2 * (P1**2 + P2**2))
    with np.errstate(divide="ignore"):
        log_mod = (_leading_log_prefactor(epsilon, params) + order * math.log(sigma)
                   + specfun.log_factorial(low) + high * math.log(2.0)
                   + specfun.log_hermite_norm(qn.n1) + specfun.log_hermite_norm(qn.n2)
                   + np.log(np.abs(lag)) + lag_scale)
        if order:
            log_mod = log_mod + order * np.log(np.abs(angular))
    phase = order * np.angle(angular) + np.where(lag < 0, math.pi, 0.0)
    return log_mod, phase


def momentum_wavefunction_closed(qn: QuantumNumbers, P1, P2, epsilon: float, params: OscillatorParams):
    log_mod, phase = momentum_wavefunction_closed_log(qn, P1, P2, epsilon, params)
    return np.exp(log_mod + 1j * phase)


# --- shape comparison ----------------------------------------------------------------


def shape_normalize(values: np.ndarray) -> np.ndarray:
    """Divide by the discrete L2 norm over the sample grid."""
    norm = np.sqrt(np.mean(np.abs(values) ** 2))
    if norm == 0:
        raise ValueError("cannot shape-normalise an identically zero sample")
    return values / norm


def shape_error(values: np.ndarray, reference: np.ndarray) -> tuple[float, float]:
    """``(sup, l2)`` difference of shape-normalised samples, relative to the reference."""
    a = shape_normalize(values)
    b = shape_normalize(reference)
    diff = np.abs(a - b)
    return float(diff.max() / np.abs(b).max()), float(np.sqrt(np.mean(diff**2)))


def log_shape_normalize(log_mod: np.ndarray) -> np.ndarray:
    """Moduli from log-moduli, shape-normalised without overflowing."""
    shifted = np.exp(log_mod - np.max(log_mod))
    return shape_normalize(shifted)


# --- the equal-frequency limit scan ----------------------------------------------------


@dataclass(frozen=True)
class ScanGrid:
    P_max: float = 10.0
    points: int = 401
    theta_samples: int = 8

    def radii(self) -> np.ndarray:
        return np.linspace(0.0, self.P_max, self.points)

    def angles(self) -> np.ndarray:
        return np.linspace(0.0, 2 * math.pi, self.theta_samples, endpoint=False)


@dataclass(frozen=True)
class ConvergenceRow:
    n1: int
    n2: int
    epsilon: float
    sup_err: float
    l2_err: float
    prefactor_ratio: float
    phase_err: float


def limit_scan(schedule: LimitSchedule, params: OscillatorParams, grid: ScanGrid = ScanGrid()) -> list[ConvergenceRow]:
    """Compare the closed Laguerre form with the Bessel continuum function along ``schedule``.

    Moduli are compared after shape normalisation on ``P in [0, P_max]``.
    ``prefactor_ratio`` is the ratio of unnormalised L2 norms, which should scale as
    ``sqrt(sqrt2 eps / (m hbar omega k))``. ``phase_err`` is the worst deviation of
    the angular phase from ``n Theta``.
    """
    n, k = schedule.n, schedule.k
    P = grid.radii()
    target = np.abs(degenerate_wavefunction(DegenerateLabel(n, k), P, 0.0))
    target_norm = np.sqrt(np.mean(target**2))
    theta = grid.angles()
    # phase probe at a radius where the target is well away from a node
    probe = P[1:][np.argmax(target[1:])]
    rows = []
    for st in schedule.steps:
        qn = QuantumNumbers(st.n1, st.n2)
        log_mod, _ = momentum_wavefunction_closed_log(qn, 0.0, P, st.epsilon, params)
        sup, l2 = shape_error(np.exp(log_mod - log_mod.max()), target)
        ratio = math.exp(log_mod.max()) * np.sqrt(np.mean(np.exp(2 * (log_mod - log_mod.max())))) / target_norm
        _, ph = momentum_wavefunction_closed_log(qn, probe * np.cos(theta), probe * np.sin(theta), st.epsilon, params)
        _, ph0 = momentum_wavefunction_closed_log(qn, probe, 0.0, st.epsilon, params)
        dev = np.angle(np.exp(1j * (ph - ph0 - n * theta)))
        rows.append(ConvergenceRow(st.n1, st.n2, st.epsilon, sup, l2, float(ratio), float(np.abs(dev).max())))
    return rows


def fit_loglog_slope(x, y) -> float:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(lx, ly, 1)[0])


def is_monotone_decreasing(values, jitter: float = 0.05) -> bool:
    return all(b <= a * (1 + jitter) for a, b in zip(values, values[1:]))


def write_scan_csv(rows: list[ConvergenceRow], path: str | Path, header: list[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["n1", "n2", "epsilon", "sup_err", "l2_err", "prefactor_ratio", "phase_err"])
        for r in rows:
            writer.writerow([r.n1, r.n2, repr(r.epsilon), repr(r.sup_err), repr(r.l2_err),
                             repr(r.prefactor_ratio), repr(r.phase_err)])


def expected_prefactor(epsilon: float, k: float, params: OscillatorParams) -> float:
    """Modulus ``sqrt(sqrt2 eps / (m hbar omega k))`` multiplying the continuum function in the limit."""
    return math.sqrt(SQRT2 * epsilon / (params.m * params.hbar * params.omega * k))


def prefactor_slope(n: int, k: float, params: OscillatorParams, total_min: int = 1000,
                    total_max: int = 16000, steps: int = 5, grid: ScanGrid = ScanGrid()) -> float:
    """Log-log slope of the unnormalised norm ratio against epsilon on a late schedule.

    The ratio carries corrections of relative size ``O(1/(n1 + n2))``; fitting from
    ``n1 + n2 = 1000`` on keeps them below the slope tolerance for ``k <= 2``.
    """
    sched = limit_schedule(n, k, params, steps, total_min=total_min, total_max=total_max)
    rows = limit_scan(sched, params, grid)
    return fit_loglog_slope([r.epsilon for r in rows], [r.prefactor_ratio for r in rows])


__all__ = [
    "PolarMomentum", "KernelForm", "ConvergenceRow", "ScanGrid", "QuadratureError", "RegimeError",
    "coord_wavefunction", "coord_residual", "degenerate_wavefunction", "degenerate_residual",
    "transition_kernel", "momentum_wavefunction_exact", "momentum_wavefunction_dominant",
    "momentum_wavefunction_closed", "momentum_wavefunction_closed_log", "leading_scale", "dominant_table",
    "shape_normalize", "shape_error", "limit_scan", "fit_loglog_slope", "is_monotone_decreasing",
    "write_scan_csv", "expected_prefactor", "params_from_epsilon", "ResidualReport", "coord_overlap_defect",
    "prefactor_slope",
]
