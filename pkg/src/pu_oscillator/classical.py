"""Classical Pais-Uhlenbeck dynamics in Ostrogradski form.

Phase-space points are ordered ``(coordinate1, coordinate2, momentum1, momentum2)``
throughout, so every linear canonical map is a 4x4 matrix acting on that vector and
symplecticity reads ``S.T @ J @ S == J``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from .core import OscillatorParams, Regime, RegimeError, classify_regime, frequency_squares, require_regime

SQRT2 = math.sqrt(2.0)

J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


class SingularTransformation(RegimeError):
    """The normal-mode map does not exist at the degenerate point."""


@dataclass(frozen=True)
class JetState:
    q: float
    qd: float
    qdd: float
    qddd: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class ClassicalState:
    q1: float
    q2: float
    Pi1: float
    Pi2: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class NormalModeState:
    x1: float
    x2: float
    p1: float
    p2: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class DegenerateModeState:
    Q1: float
    Q2: float
    P1: float
    P2: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


@dataclass(frozen=True)
class LinearCanonicalMap:
    """Matrix sending new canonical variables to ``(q1, q2, Pi1, Pi2)``."""

    matrix: np.ndarray

    def symplectic_defect(self) -> float:
        S = self.matrix
        return float(np.abs(S.T @ J4 @ S - J4).max())

    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)


def ostrogradski_state(jet: JetState, params: OscillatorParams) -> ClassicalState:
    m, lam = params.m, params.lam
    return ClassicalState(
        q1=jet.q,
        q2=jet.qd,
        Pi1=m * (jet.qd + lam * jet.qddd),
        Pi2=-m * lam * jet.qdd,
    )


def jet_from_state(state: ClassicalState, params: OscillatorParams) -> JetState:
    m, lam = params.m, params.lam
    return JetState(
        q=state.q1,
        qd=state.q2,
        qdd=-state.Pi2 / (m * lam),
        qddd=(state.Pi1 / m - state.q2) / lam,
    )


def hamiltonian_ostrogradski(state, params: OscillatorParams):
    """Ostrogradski energy; ``state`` may be a ClassicalState or an array with leading axis 4."""
    q1, q2, Pi1, Pi2 = state.as_array() if isinstance(state, ClassicalState) else state
    m, w, lam = params.m, params.omega, params.lam
    return Pi1 * q2 - Pi2**2 / (2 * m * lam) + m * w**2 * q1**2 / 2 - m * q2**2 / 2


def normal_mode_map(params: OscillatorParams) -> LinearCanonicalMap:
    """Decoupling transformation ``(x1, x2, p1, p2) -> (q1, q2, Pi1, Pi2)``."""
    regime = classify_regime(params)
    if regime is Regime.DEGENERATE:
        raise SingularTransformation("normal-mode map is singular at lam = 1/(4 omega^2)")
    if regime is not Regime.REAL_DISTINCT:
        raise RegimeError(f"normal-mode map needs RealDistinct regime, got {regime.value}")
    m, lam = params.m, params.lam
    w1s, w2s = frequency_squares(params)
    gap = w1s - w2s
    r = 1.0 / math.sqrt(lam * gap)
    s = math.sqrt(lam / gap)
    S = np.array(
        [
            [-r, r, 0.0, 0.0],
            [0.0, 0.0, r / m, r / m],
            [0.0, 0.0, s * w2s, s * w1s],
            [-m * s * w1s, m * s * w2s, 0.0, 0.0],
        ]
    )
    return LinearCanonicalMap(S)


def to_normal_modes(state: ClassicalState, params: OscillatorParams) -> NormalModeState:
    S = normal_mode_map(params)
    return NormalModeState(*np.linalg.solve(S.matrix, state.as_array()))


def from_normal_modes(state: NormalModeState, params: OscillatorParams) -> ClassicalState:
    S = normal_mode_map(params)
    return ClassicalState(*(S.matrix @ state.as_array()))


def hamiltonian_normal(state, params: OscillatorParams):
    """Decoupled energy: positive omega2 oscillator minus the omega1 ghost."""
    x1, x2, p1, p2 = state.as_array() if isinstance(state, NormalModeState) else state
    m = params.m
    w1s, w2s = frequency_squares(params)
    return (p2**2 / (2 * m) + m * w2s * x2**2 / 2) - (p1**2 / (2 * m) + m * w1s * x1**2 / 2)


def degenerate_mode_map(params: OscillatorParams) -> LinearCanonicalMap:
    """The lam-independent map ``(Q1, Q2, P1, P2) -> (q1, q2, Pi1, Pi2)``."""
    m, w = params.m, params.omega
    S = np.array(
        [
            [1 / (2 * SQRT2), 0.0, 0.0, 1 / (m * w)],
            [0.0, w / 2, SQRT2 / m, 0.0],
            [0.0, -0.75 * m * w, 1 / SQRT2, 0.0],
            [-3 * m / (4 * SQRT2), 0.0, 0.0, 1 / (2 * w)],
        ]
    )
    return LinearCanonicalMap(S)


def to_degenerate_modes(state: ClassicalState, params: OscillatorParams) -> DegenerateModeState:
    S = degenerate_mode_map(params)
    return DegenerateModeState(*np.linalg.solve(S.matrix, state.as_array()))


def from_degenerate_modes(state: DegenerateModeState, params: OscillatorParams) -> ClassicalState:
    S = degenerate_mode_map(params)
    return ClassicalState(*(S.matrix @ state.as_array()))


def hamiltonian_degenerate(state, params: OscillatorParams):
    """Rotation generator plus inverted radial potential, valid at the degenerate point."""
    Q1, Q2, P1, P2 = state.as_array() if isinstance(state, DegenerateModeState) else state
    m, w = params.m, params.omega
    return SQRT2 * w * (Q1 * P2 - Q2 * P1) - m * w**2 * (Q1**2 + Q2**2) / 2


def kernel_coefficients(params: OscillatorParams) -> tuple[float, float]:
    """``(b1, b2)`` with ``b_i = m/(2 sqrt 2) * (3/2 + lam omega_i^2)``."""
    regime = classify_regime(params)
    if regime is not Regime.REAL_DISTINCT:
        raise RegimeError(f"kernel coefficients need RealDistinct regime, got {regime.value}")
    w1s, w2s = frequency_squares(params)
    pref = params.m / (2 * SQRT2)
    return pref * (1.5 + params.lam * w1s), pref * (1.5 + params.lam * w2s)


def composed_momentum_rows(params: OscillatorParams) -> np.ndarray:
    """Rows expressing ``(P1, P2)`` through ``(x1, x2, p1, p2)``.

    Obtained by composing the inverse degenerate map with the normal-mode map, so it
    is an independent route to the kernel coefficients.
    """
    D = degenerate_mode_map(params).matrix
    S = normal_mode_map(params).matrix
    return (np.linalg.inv(D) @ S)[2:]


def kernel_momentum_rows(params: OscillatorParams) -> np.ndarray:
    """The same two rows written with ``b1, b2``."""
    b1, b2 = kernel_coefficients(params)
    w1s, w2s = frequency_squares(params)
    root = math.sqrt(params.lam * (w1s - w2s))
    m, w = params.m, params.omega
    return np.array(
        [
            [0.0, 0.0, b2 / (m * root), b1 / (m * root)],
            [-SQRT2 * w * b1 / root, SQRT2 * w * b2 / root, 0.0, 0.0],
        ]
    )


# --- dynamics -------------------------------------------------------------------------


def eom_matrix(params: OscillatorParams) -> np.ndarray:
    """First-order system for ``(q, q', q'', q''')`` from ``lam q'''' + q'' + w^2 q = 0``."""
    lam, w = params.lam, params.omega
    A = np.zeros((4, 4))
    A[0, 1] = A[1, 2] = A[2, 3] = 1.0
    A[3, 0] = -(w**2) / lam
    A[3, 2] = -1.0 / lam
    return A


def rk4_step(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _cos_derivatives(freq, t, order):
    # d^k/dt^k cos(w t) = w^k cos(w t + k pi/2); same for sin with a shifted phase
    return freq**order * np.cos(freq * t + order * np.pi / 2)


def _sin_derivatives(freq, t, order):
    return freq**order * np.sin(freq * t + order * np.pi / 2)


def _basis_jets(params: OscillatorParams, t) -> np.ndarray:
    """Basis solutions and their first three derivatives, shape ``(4 orders, 4 basis, len(t))``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    regime = classify_regime(params)
    out = np.empty((4, 4, t.size))
    if regime is Regime.REAL_DISTINCT:
        w1s, w2s = frequency_squares(params)
        w1, w2 = math.sqrt(w1s), math.sqrt(w2s)
        for k in range(4):
            out[k] = [_cos_derivatives(w1, t, k), _sin_derivatives(w1, t, k),
                      _cos_derivatives(w2, t, k), _sin_derivatives(w2, t, k)]
    else:
        w0 = math.sqrt(frequency_squares(params)[0])
        for k in range(4):
            # d^k (t f) = t f^(k) + k f^(k-1)
            tc = t * _cos_derivatives(w0, t, k) + (k * _cos_derivatives(w0, t, k - 1) if k else 0.0)
            ts = t * _sin_derivatives(w0, t, k) + (k * _sin_derivatives(w0, t, k - 1) if k else 0.0)
            out[k] = [_cos_derivatives(w0, t, k), _sin_derivatives(w0, t, k), tc, ts]
    return out


def closed_form_solution(jet0: JetState, params: OscillatorParams, t) -> np.ndarray:
    """Exact jet ``(q, q', q'', q''')`` at times ``t``; shape ``(len(t), 4)``.

    Trig superposition at the two frequencies, or secular ``t cos, t sin`` terms at
    the double root.
    """
    require_regime(params, Regime.REAL_DISTINCT, Regime.DEGENERATE)
    coeffs = np.linalg.solve(_basis_jets(params, 0.0)[:, :, 0], jet0.as_array())
    return np.einsum("kbt,b->tk", _basis_jets(params, t), coeffs)


@dataclass
class Trajectory:
    t: np.ndarray
    jets: np.ndarray
    exact: np.ndarray
    energy: np.ndarray

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "q", "qd", "qdd", "qddd", "H"])
            for t, jet, h in zip(self.t, self.jets, self.energy):
                writer.writerow([repr(float(t)), *(repr(float(v)) for v in jet), repr(float(h))])


def integrate_eom(jet0: JetState, params: OscillatorParams, t_end: float, dt: float, stride: int = 1) -> Trajectory:
    """RK4 integration of the fourth-order equation of motion.

    The system is linear, so the RK4 step is applied once to the identity to obtain
    its one-step propagator; iterating that matrix is the same scheme without the
    per-stage overhead.
    """
    require_regime(params, Regime.REAL_DISTINCT, Regime.DEGENERATE)
    if dt <= 0 or t_end < 0:
        raise ValueError("need dt > 0 and t_end >= 0")
    A = eom_matrix(params)
    step = rk4_step(lambda y: A @ y, np.eye(4), dt)
    n_steps = int(round(t_end / dt))
    y = jet0.as_array()
    kept = [y]
    for i in range(1, n_steps + 1):
        y = step @ y
        if i % stride == 0:
            kept.append(y)
    jets = np.array(kept)
    t = np.arange(len(kept)) * dt * stride
    lam, m = params.lam, params.m
    phase = np.array([jets[:, 0], jets[:, 1], m * (jets[:, 1] + lam * jets[:, 3]), -m * lam * jets[:, 2]])
    return Trajectory(t=t, jets=jets, exact=closed_form_solution(jet0, params, t),
                      energy=hamiltonian_ostrogradski(phase, params))
