"""Energy formulas for both quantizations and the constrained equal-frequency limit."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

from .core import OscillatorParams, Regime, RegimeError, params_from_epsilon, real_frequencies, require_regime

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class QuantumNumbers:
    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise ValueError(f"occupation numbers must be non-negative, got ({self.n1}, {self.n2})")

    @property
    def angular(self) -> int:
        return self.n2 - self.n1


@dataclass(frozen=True)
class DegenerateLabel:
    """Continuum label: angular number ``n`` (any integer) and radial momentum ``k > 0``."""

    n: int
    k: float

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"k must be positive, got {self.k!r}")


def energy_indefinite(qn: QuantumNumbers, params: OscillatorParams) -> float:
    """Ghost quantization: positive metric, spectrum unbounded below."""
    require_regime(params, Regime.REAL_DISTINCT)
    w1, w2 = real_frequencies(params)
    return params.hbar * (-w1 * (qn.n1 + 0.5) + w2 * (qn.n2 + 0.5))


def energy_positive(qn: QuantumNumbers, params: OscillatorParams) -> float:
    """Indefinite-metric quantization: both modes count positively."""
    require_regime(params, Regime.REAL_DISTINCT)
    w1, w2 = real_frequencies(params)
    return params.hbar * (w1 * (qn.n1 + 0.5) + w2 * (qn.n2 + 0.5))


def energy_degenerate(label: DegenerateLabel, params: OscillatorParams) -> float:
    require_regime(params, Regime.DEGENERATE)
    m, w, hbar = params.m, params.omega, params.hbar
    return w * hbar * (SQRT2 * label.n - m * w * hbar * label.k**2 / 2)


def energy_split(qn: QuantumNumbers, params: OscillatorParams, epsilon: float | None = None) -> tuple[float, float]:
    """``(discrete, epsilon_part)`` of the first-order expansion in epsilon.

    ``epsilon`` defaults to the value implied by ``params``.
    """
    require_regime(params, Regime.REAL_DISTINCT)
    eps = params.epsilon if epsilon is None else epsilon
    scale = SQRT2 * params.omega * params.hbar
    return scale * (qn.n2 - qn.n1), -scale * eps * (qn.n1 + qn.n2 + 1) / 2


def continuum_target(n: int, k: float, params: OscillatorParams) -> float:
    """Continuum energy for label ``(n, k)`` at the degenerate point (mass and frequency from ``params``)."""
    m, w, hbar = params.m, params.omega, params.hbar
    return w * hbar * (SQRT2 * n - m * w * hbar * k**2 / 2)


def constraint_constant(k: float, params: OscillatorParams) -> float:
    """Fixed value of ``epsilon (n1 + n2)`` along the schedule."""
    return params.m * params.omega * params.hbar * k**2 / SQRT2


@dataclass(frozen=True)
class LimitStep:
    n1: int
    n2: int
    epsilon: float

    @property
    def total(self) -> int:
        return self.n1 + self.n2


@dataclass(frozen=True)
class LimitSchedule:
    n: int
    k: float
    steps: tuple[LimitStep, ...] = field(default_factory=tuple)

    def check(self, params: OscillatorParams) -> None:
        c = constraint_constant(self.k, params)
        for st in self.steps:
            if st.n2 - st.n1 != self.n:
                raise ValueError(f"step {st} violates n2 - n1 = {self.n}")
            if abs(st.epsilon * st.total - c) > st.epsilon:
                raise ValueError(f"step {st} violates the epsilon constraint")
            if not 0 < st.epsilon < 1:
                raise ValueError(f"step {st} has epsilon outside (0, 1)")


def limit_schedule(n: int, k: float, params: OscillatorParams, step_count: int,
                   total_min: int | None = None, total_max: int = 2000) -> LimitSchedule:
    """Geometric sequence of labels with ``n2 - n1 = n`` and ``epsilon (n1 + n2)`` fixed.

    ``n1`` is rounded to an integer first; epsilon is then solved from the realised
    ``n1 + n2``, so the constraint holds up to floating point.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    if step_count < 1:
        raise ValueError("step_count must be positive")
    c = constraint_constant(k, params)
    if total_min is None:
        # start where epsilon is at most 0.1
        total_min = max(abs(n) + 2, math.ceil(10 * c))
    if total_max < total_min:
        raise ValueError(f"total_max={total_max} is below total_min={total_min}")
    steps = []
    for i in range(step_count):
        frac = i / (step_count - 1) if step_count > 1 else 1.0
        target = total_min * (total_max / total_min) ** frac
        n1 = max(0, -n, round((target - n) / 2))
        n2 = n1 + n
        total = n1 + n2
        eps = c / total
        step = LimitStep(n1, n2, eps)
        if steps and steps[-1].total == total:
            continue
        steps.append(step)
    schedule = LimitSchedule(n=n, k=k, steps=tuple(steps))
    schedule.check(params)
    return schedule


@dataclass(frozen=True)
class ScheduleRow:
    n1: int
    n2: int
    epsilon: float
    E_disc: float
    E_eps: float
    E_total: float
    E_target: float
    abs_err: float


def schedule_energies(schedule: LimitSchedule, params: OscillatorParams) -> list[ScheduleRow]:
    """Exact discrete energies along ``schedule`` against the continuum value."""
    target = continuum_target(schedule.n, schedule.k, params)
    rows = []
    for st in schedule.steps:
        p = params_from_epsilon(params.m, params.omega, params.hbar, st.epsilon)
        qn = QuantumNumbers(st.n1, st.n2)
        disc, eps_part = energy_split(qn, p, st.epsilon)
        total = energy_indefinite(qn, p)
        rows.append(ScheduleRow(st.n1, st.n2, st.epsilon, disc, eps_part, total, target, abs(total - target)))
    return rows


def superintegrable_lambda(omega: float = 1.0, ratio: float = 2.0) -> float:
    """Stiffness giving ``omega1 / omega2 = ratio``.

    From ``w1^2 + w2^2 = 1/lam`` and ``w1^2 w2^2 = omega^2/lam`` with ``w1 = ratio w2``:
    ``lam = ratio^2 / ((1 + ratio^2)^2 omega^2)``.
    """
    r2 = ratio**2
    return r2 / ((1 + r2) ** 2 * omega**2)


def energy_collisions(params: OscillatorParams, nmax: int = 50, tol: float = 1e-9) -> list[tuple[QuantumNumbers, QuantumNumbers]]:
    """Pairs of distinct labels up to ``nmax`` whose indefinite energies agree within ``tol``."""
    labels = [QuantumNumbers(a, b) for a in range(nmax + 1) for b in range(nmax + 1)]
    energies = sorted(((energy_indefinite(q, params), q) for q in labels), key=lambda pair: pair[0])
    hits = []
    for i, (e, q) in enumerate(energies):
        j = i + 1
        while j < len(energies) and energies[j][0] - e <= tol:
            hits.append((q, energies[j][1]))
            j += 1
    return hits


def write_schedule_csv(rows: list[ScheduleRow], path: str | Path, header: list[str] = ()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["n1", "n2", "epsilon", "E_disc", "E_eps", "E_total", "E_target", "abs_err"])
        for r in rows:
            writer.writerow([r.n1, r.n2, repr(r.epsilon), repr(r.E_disc), repr(r.E_eps),
                             repr(r.E_total), repr(r.E_target), repr(r.abs_err)])


__all__ = [
    "QuantumNumbers", "DegenerateLabel", "LimitStep", "LimitSchedule", "ScheduleRow", "RegimeError",
    "energy_indefinite", "energy_positive", "energy_degenerate", "energy_split", "continuum_target",
    "constraint_constant", "limit_schedule", "schedule_energies", "superintegrable_lambda",
    "energy_collisions", "write_schedule_csv",
]
