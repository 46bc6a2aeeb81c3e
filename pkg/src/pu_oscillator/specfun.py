"""Special functions used by the eigenfunctions and the equal-frequency limit.

Hermite and Laguerre polynomials come from their three-term recurrences and
Bessel functions from Miller's backward recurrence. The recurrences accept numpy
arrays. Each has a log-scaled variant, needed once the degrees reach the thousands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

# Rescale recurrences once magnitudes pass this bound.
_BIG = 1e150
_LOG_BIG = math.log(_BIG)

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "GaussHermite"

    def integrate(self, f):
        """``int f(x) exp(-x^2) dx`` for a vectorised ``f``."""
        return np.sum(self.weights * f(self.nodes))


def hermite_scaled(n: int, z):
    """Physicists' ``H_n(z)`` as ``(mantissa, log_scale)`` with ``H_n = mantissa * exp(log_scale)``.

    Works for complex ``z`` arrays; no overflow for any ``n``.
    """
    if n < 0:
        raise ValueError("hermite degree must be non-negative")
    z = np.asarray(z)
    dtype = np.result_type(z.dtype, np.float64)
    h_prev = np.ones(z.shape, dtype=dtype)
    log_scale = np.zeros(z.shape)
    if n == 0:
        return h_prev, log_scale
    h = 2 * z.astype(dtype)
    for k in range(1, n):
        h, h_prev = 2 * z * h - 2 * k * h_prev, h
        if k % 4 == 0 and np.max(np.abs(h), initial=0.0) > _BIG:
            big = np.abs(h) > _BIG
            h = np.where(big, h / _BIG, h)
            h_prev = np.where(big, h_prev / _BIG, h_prev)
            log_scale = log_scale + big * _LOG_BIG
    return h, log_scale


def hermite(n: int, z):
    """Physicists' Hermite polynomial ``H_n(z)``; raises OverflowError where it does not fit a double."""
    mant, log_scale = hermite_scaled(n, z)
    if np.any(log_scale > 0):
        with np.errstate(over="ignore"):
            val = mant * np.exp(log_scale)
        if not np.all(np.isfinite(val)):
            raise OverflowError(f"H_{n} overflows; use hermite_scaled")
        return val
    return mant if np.ndim(mant) else mant[()]


def laguerre_scaled(m: int, alpha: int, x):
    """Generalized Laguerre ``L^alpha_m(x)`` as ``(mantissa, log_scale)``."""
    if m < 0 or alpha < 0:
        raise ValueError("laguerre needs m >= 0 and alpha >= 0")
    x = np.asarray(x, dtype=float)
    l_prev = np.ones(x.shape)
    log_scale = np.zeros(x.shape)
    if m == 0:
        return l_prev, log_scale
    l_cur = 1.0 + alpha - x
    for k in range(1, m):
        l_cur, l_prev = ((2 * k + 1 + alpha - x) * l_cur - (k + alpha) * l_prev) / (k + 1), l_cur
        if k % 4 == 0 and np.max(np.abs(l_cur), initial=0.0) > _BIG:
            big = np.abs(l_cur) > _BIG
            l_cur = np.where(big, l_cur / _BIG, l_cur)
            l_prev = np.where(big, l_prev / _BIG, l_prev)
            log_scale = log_scale + big * _LOG_BIG
    return l_cur, log_scale


def laguerre(m: int, alpha: int, x):
    mant, log_scale = laguerre_scaled(m, alpha, x)
    val = mant * np.exp(log_scale)
    return val if np.ndim(val) else float(val)


def _bessel_series(n: int, x: np.ndarray) -> np.ndarray:
    half = x / 2.0
    term = half**n / math.factorial(n)
    total = term.copy()
    for k in range(1, 60):
        term = -term * half * half / (k * (k + n))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _bessel_miller(n: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence normalised by ``J_0 + 2 sum J_2k = 1``."""
    xmax = float(x.max())
    start = max(n, int(xmax)) + 20 + int(math.sqrt(40 * max(n, xmax, 1.0)))
    start += start % 2
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-30)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    for k in range(start, 0, -1):
        # j_cur holds J_k, produce J_{k-1}
        j_prev = (2 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        km1 = k - 1
        if km1 == n:
            result = j_cur.copy()
        if km1 % 2 == 0 and km1 > 0:
            norm += 2 * j_cur
        big = np.abs(j_cur) > _BIG
        if np.any(big):
            scale = np.where(big, 1.0 / _BIG, 1.0)
            j_cur, j_next, norm, result = j_cur * scale, j_next * scale, norm * scale, result * scale
    norm += j_cur
    return result / norm


def bessel_j(n: int, x):
    """Integer-order Bessel function ``J_n(x)`` for ``x >= 0``."""
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0):
        raise ValueError("bessel_j is defined here for x >= 0")
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    flat = np.atleast_1d(x_arr).ravel()
    out = np.zeros_like(flat)
    small = flat < 1.0
    if np.any(small):
        out[small] = _bessel_series(n, flat[small])
    if np.any(~small):
        out[~small] = _bessel_miller(n, flat[~small])
    out = sign * out.reshape(np.shape(x_arr))
    return out if out.ndim else float(out)


def gauss_hermite(K: int) -> QuadratureRule:
    """K-point Gauss-Hermite rule for the weight ``exp(-x^2)``."""
    if not 2 <= K <= 512:
        raise ValueError(f"K must lie in [2, 512], got {K}")
    # numpy's hermgauss overflows its weights from K = 371 on; scipy's rule does not
    nodes, weights = special.roots_hermite(K)
    return QuadratureRule(nodes=nodes, weights=weights)


def log_factorial(n) -> float:
    if n < 0:
        raise ValueError("log_factorial needs n >= 0")
    return math.lgamma(n + 1)


def stirling_log_factorial(n: int) -> float:
    """Leading Stirling approximation ``n ln n - n + ln(2 pi n)/2``."""
    return n * math.log(n) - n + 0.5 * math.log(2 * math.pi * n)


def log_hermite_norm(n: int) -> float:
    """``ln N(n)`` with ``N(n) = (sqrt(pi) 2^n n!)^(-1/2)``."""
    return -0.5 * (0.5 * math.log(math.pi) + n * math.log(2.0) + log_factorial(n))


def hermite_norm(n: int) -> float:
    return math.exp(log_hermite_norm(n))
