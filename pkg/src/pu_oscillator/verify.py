"""Invariant suites shared by ``pu-osc verify-all`` and the acceptance tests.

Each suite returns named checks carrying the measured value and the tolerance it was
held to. ``tolerance_scale`` multiplies every numeric tolerance, so a run with a tiny
scale demonstrates that failures are reported by name.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import classical, fock, specfun, spectra, wavefn
from .core import (OscillatorParams, Regime, classify_regime, degenerate_params, epsilon_expansion, frequencies,
                   frequency_squares, params_from_epsilon)
from .spectra import DegenerateLabel, QuantumNumbers


@dataclass
class Check:
    name: str
    passed: bool
    value: float | str
    tolerance: str


@dataclass
class SuiteResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)
    seconds: float = 0.0
    budget: float = math.inf

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks) and self.seconds <= self.budget

    def to_json(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        out["budget"] = None if math.isinf(self.budget) else self.budget
        return out


@dataclass(frozen=True)
class VerifyConfig:
    m: float = 1.0
    omega: float = 1.0
    lam: float = 0.15
    hbar: float = 1.0
    mu: float = 1.0
    seed: int = 12345
    tolerance_scale: float = 1.0

    @property
    def params(self) -> OscillatorParams:
        return OscillatorParams(m=self.m, omega=self.omega, lam=self.lam, hbar=self.hbar)


class _Recorder:
    def __init__(self, scale: float):
        self.scale = scale
        self.checks: list[Check] = []

    def le(self, name: str, value: float, tol: float):
        tol = tol * self.scale
        self.checks.append(Check(name, bool(value <= tol), float(value), f"<= {tol:.3g}"))

    def near(self, name: str, value: float, target: float, tol: float):
        tol = tol * self.scale
        self.checks.append(Check(name, bool(abs(value - target) <= tol), float(value), f"{target} +- {tol:.3g}"))

    def true(self, name: str, ok: bool, value: str = ""):
        self.checks.append(Check(name, bool(ok), value or str(bool(ok)), "exact"))


def _rel(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)) / np.maximum(np.abs(np.asarray(b)), 1e-300)))


# --- suite 1 ------------------------------------------------------------------------------


def suite_regimes(cfg: VerifyConfig, rec: _Recorder) -> None:
    m, w = cfg.m, cfg.omega
    crit = 1 / (4 * w**2)
    cases = {crit * 4: Regime.COMPLEX_PAIR, crit * 0.6: Regime.REAL_DISTINCT, crit: Regime.DEGENERATE,
             -crit * 4: Regime.MIXED_REAL_IMAGINARY}
    for lam, want in cases.items():
        got = classify_regime(OscillatorParams(m=m, omega=w, lam=lam))
        rec.true(f"regime at lam={lam:g}", got is want, got.value)
    pair = frequencies(degenerate_params(m, w))
    rec.true("double root omega1 = omega2 = sqrt2 omega", pair.omega1 == pair.omega2 == math.sqrt(2) * w,
             f"{pair.omega1!r}, {pair.omega2!r}")
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for lam in list(cases) + list(rng.uniform(-2, 2, 200) * crit * 4):
        if lam == 0:
            continue
        p = OscillatorParams(m=m, omega=w, lam=float(lam))
        a, b = frequency_squares(p)
        worst = max(worst, abs((a + b) - 1 / p.lam) * abs(p.lam), abs(a * b - w**2 / p.lam) * abs(p.lam) / w**2)
    rec.le("Vieta identities (relative)", worst, 1e-12)
    try:
        OscillatorParams(lam=0.0)
        rec.true("lam = 0 rejected", False)
    except ValueError:
        rec.true("lam = 0 rejected", True)
    p = OscillatorParams(m=m, omega=w, lam=cfg.lam)
    w1, w2 = frequencies(p).omega1, frequencies(p).omega2
    rec.true("omega1 >= omega2 > 0 in the stable regime", w1 >= w2 > 0, f"{w1:.9g}, {w2:.9g}")
    eps = [0.1, 0.01, 0.001]
    gaps = [abs(frequencies(params_from_epsilon(m, w, cfg.hbar, e)).omega1 - epsilon_expansion(p, e)[0]) for e in eps]
    rec.near("first-order epsilon expansion error slope", wavefn.fit_loglog_slope(eps, gaps), 2.0, 0.05)


# --- suite 2 ------------------------------------------------------------------------------


def _random_states(rng, count: int) -> np.ndarray:
    half = count // 2
    return np.concatenate([rng.normal(scale=0.1, size=(half, 4)), rng.normal(scale=10.0, size=(count - half, 4))])


def suite_canonical(cfg: VerifyConfig, rec: _Recorder) -> None:
    p = cfg.params
    dp = degenerate_params(cfg.m, cfg.omega, cfg.hbar)
    rng = np.random.default_rng(cfg.seed)
    S = classical.normal_mode_map(p)
    D = classical.degenerate_mode_map(p)
    rec.le("decoupling map symplectic defect", S.symplectic_defect(), 1e-12)
    rec.le("degenerate-point map symplectic defect", D.symplectic_defect(), 1e-12)
    for eps in (0.5, 0.1, 0.01):
        pe = params_from_epsilon(cfg.m, cfg.omega, cfg.hbar, eps)
        # entries grow like 1/sqrt(eps); the defect is measured relative to |S|^2
        Se = classical.normal_mode_map(pe)
        rec.le(f"decoupling map symplectic defect, eps={eps} (relative)",
               Se.symplectic_defect() / max(1.0, np.abs(Se.matrix).max() ** 2), 1e-12)

    states = _random_states(rng, 1000)
    modes = np.linalg.solve(S.matrix, states.T)
    h5 = classical.hamiltonian_ostrogradski(states.T, p)
    h8 = classical.hamiltonian_normal(modes, p)
    rec.le("Ostrogradski energy = decoupled energy, 1000 points (relative)",
           float(np.max(np.abs(h5 - h8) / np.maximum(np.abs(h5), 1e-300))), 1e-10)
    dmodes = np.linalg.solve(D.matrix, states.T)
    hd5 = classical.hamiltonian_ostrogradski(states.T, dp)
    hd21 = classical.hamiltonian_degenerate(dmodes, dp)
    rec.le("degenerate-point energy = rotation + inverted potential (relative)",
           float(np.max(np.abs(hd5 - hd21) / np.maximum(np.abs(hd5), 1e-300))), 1e-10)
    back = S.matrix @ modes
    rec.le("decoupling round trip", float(np.max(np.abs(back - states.T) / np.maximum(np.abs(states.T), 1.0))), 1e-12)
    back_d = D.matrix @ dmodes
    rec.le("degenerate map round trip", float(np.max(np.abs(back_d - states.T) / np.maximum(np.abs(states.T), 1.0))),
           1e-12)
    comp = classical.composed_momentum_rows(p)
    kern = classical.kernel_momentum_rows(p)
    scale = np.abs(kern).max()
    rec.le("kernel coefficients by composition (relative)", float(np.abs(comp - kern).max() / scale), 1e-12)
    b1, b2 = classical.kernel_coefficients(p)
    rec.le("b1 + b2 = sqrt2 m (relative)", abs(b1 + b2 - math.sqrt(2) * cfg.m) / (math.sqrt(2) * cfg.m), 1e-12)
    try:
        classical.normal_mode_map(dp)
        rec.true("decoupling map rejected at the degenerate point", False)
    except classical.SingularTransformation:
        rec.true("decoupling map rejected at the degenerate point", True)


# --- suite 3 ------------------------------------------------------------------------------


def suite_dynamics(cfg: VerifyConfig, rec: _Recorder) -> None:
    p = cfg.params
    w1, w2 = (math.sqrt(v) for v in frequency_squares(p))
    dt = (2 * math.pi / w1) / 1000
    t_slow = 2 * math.pi / w2
    pure = classical.JetState(1.0, 0.0, -w1**2, 0.0)
    traj = classical.integrate_eom(pure, p, 10 * t_slow, dt, stride=10)
    rec.le("RK4 vs cos(omega1 t), 10 periods", float(np.abs(traj.jets[:, 0] - np.cos(w1 * traj.t)).max()), 1e-6)
    rng = np.random.default_rng(cfg.seed)
    jet = classical.JetState(*rng.normal(size=4))
    traj = classical.integrate_eom(jet, p, 10 * t_slow, dt, stride=10)
    rec.le("RK4 vs closed form, random jet, 10 periods", float(np.abs(traj.jets - traj.exact).max()), 1e-6)
    long = classical.integrate_eom(jet, p, 100 * t_slow, dt, stride=100)
    drift = float(np.abs(long.energy - long.energy[0]).max() / abs(long.energy[0]))
    rec.le("energy drift, 100 periods (relative)", drift, 1e-8)
    zero = classical.integrate_eom(classical.JetState(0, 0, 0, 0), p, t_slow, dt)
    rec.true("zero jet stays zero", not np.any(zero.jets))
    dp = degenerate_params(cfg.m, cfg.omega, cfg.hbar)
    w0 = math.sqrt(2) * cfg.omega
    dtd = (2 * math.pi / w0) / 1000
    trd = classical.integrate_eom(jet, dp, 10 * 2 * math.pi / w0, dtd, stride=10)
    err = np.abs(trd.jets - trd.exact).max(axis=1) / (1 + trd.t)
    rec.le("RK4 vs secular closed form at the double root, scaled by 1+t", float(err.max()), 1e-6)


# --- suite 4 ------------------------------------------------------------------------------


def suite_spectra(cfg: VerifyConfig, rec: _Recorder) -> None:
    p = cfg.params
    w1, w2 = (math.sqrt(v) for v in frequency_squares(p))
    labels = [QuantumNumbers(a, b) for a in range(51) for b in range(51)]
    pos = np.array([spectra.energy_positive(q, p) for q in labels])
    ind = np.array([spectra.energy_indefinite(q, p) for q in labels])
    rec.true("positive scheme energies all > 0 on 51x51 labels", bool(np.all(pos > 0)))
    diff = np.array([2 * cfg.hbar * w1 * (q.n1 + 0.5) for q in labels])
    rec.le("E_pos - E_ghost = 2 hbar w1 (n1 + 1/2) (relative)", _rel(pos - ind, diff), 1e-12)
    rec.true("ghost energies unbounded below", spectra.energy_indefinite(QuantumNumbers(10**6, 0), p) < -1e5)
    rep = fock.positive_hamiltonian_check(p, fock.FockBasis(20))
    rec.le("truncated positive Hamiltonian spectrum, interior labels (relative)", rep.eigen_rel_err, 1e-10)
    rec.le("lowest eigenvalue = hbar (w1 + w2)/2 (relative)",
           abs(rep.lowest - rep.expected_lowest) / rep.expected_lowest, 1e-10)
    rec.le("ghost and positive Hamiltonians coincide as matrices", rep.ghost_vs_positive_diff, 1e-10)
    rec.le("x1^+ = -x1, x2^+ = x2 (and momenta)", rep.plus_adjoint_defect, 1e-12)
    rec.le("coordinates star-hermitian under eta", rep.star_hermitian_defect, 1e-12)
    rec.le("[q_i, Pi_j] = i hbar delta_ij on interior states", rep.ccr_defect, 1e-10)
    rec.true("physical states |2n1, n2> have norm +1", rep.physical_norms_positive)
    dp = degenerate_params(cfg.m, cfg.omega, cfg.hbar)
    e = spectra.energy_degenerate(DegenerateLabel(2, 1.0), dp)
    expect = cfg.omega * cfg.hbar * (2 * math.sqrt(2) - cfg.m * cfg.omega * cfg.hbar / 2)
    rec.le("continuum energy formula at (n, k) = (2, 1)", abs(e - expect), 1e-12)
    rec.true("no energy coincidences for an irrational frequency ratio",
             not spectra.energy_collisions(p, 50), f"ratio {w1 / w2:.6f}")
    sp = OscillatorParams(m=cfg.m, omega=cfg.omega, lam=spectra.superintegrable_lambda(cfg.omega, 2.0), hbar=cfg.hbar)
    rec.true("coincidences for frequency ratio 2", len(spectra.energy_collisions(sp, 50)) > 0)
    sched = spectra.limit_schedule(1, 1.0, p, 8)
    errs = [r.abs_err for r in spectra.schedule_energies(sched, p)]
    rec.true("schedule energy error decreases", wavefn.is_monotone_decreasing(errs, 1e-9))
    bound = max(r.abs_err - math.sqrt(2) * cfg.omega * cfg.hbar * r.epsilon / 2
                for r in spectra.schedule_energies(sched, p))
    rec.le("schedule energy error <= sqrt2 omega hbar eps / 2", max(bound, 0.0), 1e-12)


# --- suite 5 ------------------------------------------------------------------------------


def suite_eigenfunctions(cfg: VerifyConfig, rec: _Recorder) -> None:
    p = cfg.params
    rec.le("coordinate eigenfunctions orthonormal, n1, n2 <= 20", wavefn.coord_overlap_defect(20, p), 1e-10)
    for qn in (QuantumNumbers(0, 0), QuantumNumbers(3, 5), QuantumNumbers(20, 20)):
        r = wavefn.coord_residual(qn, p)
        rec.le(f"coordinate eigen-residual {qn.n1, qn.n2}, Richardson", r.extrapolated, 1e-6)
        rec.near(f"coordinate residual order {qn.n1, qn.n2}", r.order, 2.0, 0.1)
    dp = degenerate_params(cfg.m, cfg.omega, cfg.hbar)
    for lab in (DegenerateLabel(0, 1.0), DegenerateLabel(2, 1.0), DegenerateLabel(-3, 2.0)):
        r = wavefn.degenerate_residual(lab, dp)
        rec.le(f"continuum eigen-residual {lab.n, lab.k}, Richardson", r.extrapolated, 1e-6)
        rec.near(f"continuum residual order {lab.n, lab.k}", r.order, 2.0, 0.1)


# --- suite 6 ------------------------------------------------------------------------------


def leading_order_agreement(nmax: int, epsilon: float, params: OscillatorParams, window: float = 3.0,
                            points: int = 13) -> float:
    """Worst shape-normalised sup error between quadrature and closed form, ``n1, n2 <= nmax``.

    The grid covers ``|sigma P_i| <= window``.
    """
    sigma = wavefn.leading_scale(epsilon, params)
    g = np.linspace(-window / sigma, window / sigma, points)
    P1, P2 = np.meshgrid(g, g, indexing="ij")
    table = wavefn.dominant_table(nmax, P1, P2, epsilon, params)
    worst = 0.0
    for a in range(nmax + 1):
        for b in range(nmax + 1):
            closed = wavefn.momentum_wavefunction_closed(QuantumNumbers(a, b), P1, P2, epsilon, params)
            worst = max(worst, wavefn.shape_error(table[a, b], closed)[0])
    return worst


def suite_leading_order(cfg: VerifyConfig, rec: _Recorder) -> None:
    p = cfg.params
    for eps in (0.1, 0.01):
        rec.le(f"quadrature = closed Laguerre form, n1, n2 <= 40, eps={eps}",
               leading_order_agreement(40, eps, p), 1e-8)
        sigma = wavefn.leading_scale(eps, p)
        P1, P2 = 0.7 / sigma, -1.3 / sigma
        q = wavefn.momentum_wavefunction_dominant(QuantumNumbers(5, 9), P1, P2, eps, p)
        c = wavefn.momentum_wavefunction_closed(QuantumNumbers(5, 9), P1, P2, eps, p)
        rec.le(f"absolute constants agree, (5, 9), eps={eps} (relative)", abs(q - c) / abs(c), 1e-10)
    eps = 1e-3
    pe = params_from_epsilon(cfg.m, cfg.omega, cfg.hbar, eps)
    g = np.linspace(-5, 5, 11)
    P1, P2 = np.meshgrid(g, g, indexing="ij")
    qn = QuantumNumbers(3, 3)
    exact = wavefn.momentum_wavefunction_exact(qn, P1, P2, pe)
    dom = wavefn.momentum_wavefunction_dominant(qn, P1, P2, eps, pe)
    rec.le("exact vs leading order at eps=1e-3, (3, 3)", wavefn.shape_error(np.abs(exact), np.abs(dom))[0], 1e-2)


# --- suites 7 and 8 -------------------------------------------------------------------------

LIMIT_NS = (0, 1, 2, 3)
LIMIT_KS = (0.5, 1.0, 2.0)


def laguerre_bessel_rate(alpha: int = 0, x: float = 1.0, ms=(250, 500, 1000, 2000, 4000)) -> float:
    """Log-log slope of the relative error of ``m^-a L^a_m(x/m)`` against ``x^(-a/2) J_a(2 sqrt x)``."""
    target = x ** (-alpha / 2) * specfun.bessel_j(alpha, 2 * math.sqrt(x))
    errs = [abs(specfun.laguerre(m, alpha, x / m) / m**alpha - target) / abs(target) for m in ms]
    return wavefn.fit_loglog_slope(ms, errs)


def suite_limit(cfg: VerifyConfig, rec: _Recorder, steps: int = 8) -> None:
    p = cfg.params
    rates = []
    for n in LIMIT_NS:
        for k in LIMIT_KS:
            sched = spectra.limit_schedule(n, k, p, steps)
            rows = wavefn.limit_scan(sched, p)
            sup = [r.sup_err for r in rows]
            rec.true(f"sup error decreasing, n={n}, k={k}", wavefn.is_monotone_decreasing(sup, 0.05),
                     ", ".join(f"{v:.3g}" for v in sup))
            rec.le(f"sup error at n1+n2={sched.steps[-1].total}, n={n}, k={k}", sup[-1], 0.02)
            rec.le(f"angular phase n Theta, n={n}, k={k}", max(r.phase_err for r in rows), 1e-6)
            tail = rows[len(rows) // 2:]
            rates.append(wavefn.fit_loglog_slope([r.n1 + r.n2 for r in tail], [r.sup_err for r in tail]))
    oracle = laguerre_bessel_rate()
    ratio = float(np.median(rates)) / oracle
    rec.true("scan rate within a factor 3 of the Laguerre-Bessel rate", 1 / 3 <= ratio <= 3,
             f"scan {np.median(rates):.3f}, oracle {oracle:.3f}")


def suite_prefactor(cfg: VerifyConfig, rec: _Recorder) -> None:
    p = cfg.params
    for n in LIMIT_NS:
        for k in LIMIT_KS:
            rec.near(f"sqrt(eps) prefactor slope, n={n}, k={k}", wavefn.prefactor_slope(n, k, p), 0.5, 0.02)


# --- suite 9 ------------------------------------------------------------------------------


def suite_blowup(cfg: VerifyConfig, rec: _Recorder) -> None:
    eps = list(np.geomspace(1e-3, 1e-1, 7))
    rep = fock.adjoint_blowup_scan(eps, fock.FockBasis(12), cfg.m, cfg.omega, cfg.hbar)
    rec.near("slope of the leading adjoint coefficient", rep.slope, -2.0, 0.05)
    rec.le("involution q1^++ = q1", max(r.involution_defect for r in rep.rows), 1e-12)
    sub = max(max(abs(r.q2_coeff), abs(r.Pi1_coeff), abs(r.Pi2_residual)) for r in rep.rows)
    rec.le("sub-leading coefficients bounded", sub, 1e-6)
    agree = max(abs(r.leading - r.map_leading) / abs(r.map_leading) for r in rep.rows)
    rec.le("operator fit = classical conjugation map (relative)", agree, 1e-8)


# --- suite 10 -----------------------------------------------------------------------------


def suite_degenerate_algebra(cfg: VerifyConfig, rec: _Recorder) -> None:
    basis = fock.FockBasis(40)
    for mu in sorted({1, 2, cfg.mu}):
        chk = fock.check_degenerate_algebra(mu, basis)
        for name, ok in chk.results.items():
            rec.true(f"{name} (mu={mu})", ok)
    alg = fock.degenerate_algebra(cfg.mu, basis, cfg.omega)
    inner = basis.interior()
    blk = np.ix_(inner, inner)
    rec.le("float engine: H(a, b) = H(A)", float(np.abs(alg["H_ab"] - alg["H"])[blk].max()), 1e-12)


# --- suite 11 -----------------------------------------------------------------------------


def suite_exact_structure(cfg: VerifyConfig, rec: _Recorder, max_n: int = 64) -> None:
    reports = fock.jordan_table(max_n)
    bad_block = [r.n for r in reports if not r.is_single_block]
    bad_nil = [r.n for r in reports if r.nilpotency_index != r.n + 1]
    bad_vec = [r.n for r in reports if not r.matches_chain]
    rec.true(f"single Jordan block for 0 <= n <= {max_n}", not bad_block, str(bad_block or "all"))
    rec.true("nilpotency index exactly n + 1", not bad_nil, str(bad_nil or "all"))
    rec.true("unique eigenvector = binomial chain vector", not bad_vec, str(bad_vec or "all"))
    norms = [fock.zero_norm(n) for n in range(max_n + 1)]
    rec.true("vacuum norm +1", norms[0] == 1, str(norms[0]))
    rec.true(f"zero norm for 1 <= n <= {max_n}", all(v == 0 for v in norms[1:]))
    rec.true("chain vectors are exact eigenvectors", all(fock.verify_chain_eigenvector(n) for n in range(max_n + 1)))
    for name, ok in fock.check_structure_identities(fock.FockBasis(40)).items():
        rec.true(name, ok)
    defects = [fock.normality_defect(n) for n in range(0, 21)]
    rec.true("[H, H^+] = 0 on n = 0", defects[0] == 0)
    rec.true("[H, H^+] != 0 for 1 <= n <= 20", all(d > 0 for d in defects[1:]), str(defects[1:4]))


SUITES = [
    (1, "regimes and frequencies", suite_regimes, 1.0),
    (2, "canonical structure", suite_canonical, 1.0),
    (3, "classical dynamics", suite_dynamics, 5.0),
    (4, "spectra", suite_spectra, 10.0),
    (5, "eigenfunction residuals", suite_eigenfunctions, 10.0),
    (6, "leading-order quadrature vs closed form", suite_leading_order, 30.0),
    (7, "equal-frequency limit", suite_limit, 120.0),
    (8, "sqrt(eps) prefactor", suite_prefactor, 120.0),
    (9, "adjoint blow-up", suite_blowup, 10.0),
    (10, "degenerate algebra", suite_degenerate_algebra, 10.0),
    (11, "exact structure theorems", suite_exact_structure, 60.0),
]


def run_suite(number: int, cfg: VerifyConfig = VerifyConfig()) -> SuiteResult:
    _, title, fn, budget = next(s for s in SUITES if s[0] == number)
    rec = _Recorder(cfg.tolerance_scale)
    start = time.perf_counter()
    try:
        fn(cfg, rec)
    except Exception as exc:  # a crash is a failed check, reported by name
        rec.true(f"suite raised {type(exc).__name__}", False, str(exc))
    return SuiteResult(number, title, rec.checks, time.perf_counter() - start, budget)


def run_all(cfg: VerifyConfig = VerifyConfig(), numbers=None) -> list[SuiteResult]:
    return [run_suite(n, cfg) for n, *_ in SUITES if numbers is None or n in numbers]
