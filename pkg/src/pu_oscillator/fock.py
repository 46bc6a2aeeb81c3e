"""Truncated two-mode Fock space.

Two engines share one basis ordering:

* a float engine in the orthonormal basis ``|n1, n2>`` (dense numpy matrices), used
  for spectra and the eta-metric quantization;
* an exact engine in the unnormalised monomial basis
  ``|n1, n2) = (A1^+)^n1 (A2^+)^n2 |0, 0>``, where every ladder operator has integer
  entries. Operators there are ``Fraction * integer sparse matrix``, so the commutators,
  the Jordan structure and the norms of the degenerate theory are checked exactly.

Truncation keeps ``n1 + n2 <= cutoff``; identities are asserted only on the interior
(total occupation ``<= cutoff - 2``), never on the edge layer.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .classical import normal_mode_map
from .core import OscillatorParams, Regime, frequency_squares, params_from_epsilon, require_regime


@dataclass(frozen=True)
class FockBasis:
    """States with ``n1 + n2 <= cutoff``, ordered by total occupation then ``n1`` descending."""

    cutoff: int = 40

    @cached_property
    def states(self) -> tuple[tuple[int, int], ...]:
        return tuple((n - k, k) for n in range(self.cutoff + 1) for k in range(n + 1))

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        return {s: i for i, s in enumerate(self.states)}

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) * (self.cutoff + 2) // 2

    @cached_property
    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.array(self.states)
        return arr[:, 0], arr[:, 1]

    @property
    def totals(self) -> np.ndarray:
        n1, n2 = self.occupations
        return n1 + n2

    def interior(self, margin: int = 2) -> np.ndarray:
        return np.flatnonzero(self.totals <= self.cutoff - margin)

    def layer(self, n: int) -> np.ndarray:
        return np.flatnonzero(self.totals == n)


# --- float engine ------------------------------------------------------------------------


def annihilation(basis: FockBasis, mode: int) -> np.ndarray:
    """Orthonormal-basis lowering operator of ``mode`` (1 or 2)."""
    a = np.zeros((basis.dim, basis.dim))
    for j, (n1, n2) in enumerate(basis.states):
        occ = n1 if mode == 1 else n2
        if occ:
            target = (n1 - 1, n2) if mode == 1 else (n1, n2 - 1)
            a[basis.index[target], j] = math.sqrt(occ)
    return a


def dagger(op: np.ndarray) -> np.ndarray:
    return op.conj().T


def commutator(a, b):
    return a @ b - b @ a


@dataclass(frozen=True)
class MetricOperator:
    """Diagonal sign metric; ``kind`` is ``"eta"`` ((-1)^n1) or ``"tau"`` ((-1)^n2)."""

    signs: np.ndarray
    kind: str

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.signs.astype(float))

    def inner(self, phi: np.ndarray, psi: np.ndarray):
        """Indefinite product ``(phi, metric psi)``."""
        return np.vdot(phi, self.signs * psi)


def eta_metric(basis: FockBasis) -> MetricOperator:
    n1, _ = basis.occupations
    return MetricOperator(np.where(n1 % 2, -1, 1), "eta")


def tau_metric(basis: FockBasis) -> MetricOperator:
    _, n2 = basis.occupations
    return MetricOperator(np.where(n2 % 2, -1, 1), "tau")


def star_conjugate(op: np.ndarray, metric: MetricOperator) -> np.ndarray:
    """Adjoint with respect to the indefinite product: ``metric @ op^+ @ metric``."""
    s = metric.signs
    return s[:, None] * dagger(op) * s[None, :]


def build_mode_operators(basis: FockBasis, params: OscillatorParams) -> dict[str, np.ndarray]:
    """Ladder operators and the mode coordinates of the eta-metric scheme.

    ``x1h, p1h, x2h, p2h`` are the plus-hermitian combinations
    ``x = i sqrt(hbar/2 m w)(a - a^+)``, ``p = sqrt(m hbar w/2)(a + a^+)``. The scheme's
    coordinates are ``x2, p2 = x2h, p2h`` and ``x1 = -i x1h``, ``p1 = i p1h``; so
    ``x1^+ = -x1`` while both stay star-hermitian under ``eta = (-1)^N1``.
    """
    require_regime(params, Regime.REAL_DISTINCT)
    m, hbar = params.m, params.hbar
    w1s, w2s = frequency_squares(params)
    ops: dict[str, np.ndarray] = {}
    for mode, ws in ((1, w1s), (2, w2s)):
        w = math.sqrt(ws)
        a = annihilation(basis, mode)
        ad = a.T.copy()
        ops[f"a{mode}"], ops[f"a{mode}d"] = a, ad
        ops[f"x{mode}h"] = 1j * math.sqrt(hbar / (2 * m * w)) * (a - ad)
        ops[f"p{mode}h"] = math.sqrt(m * hbar * w / 2) * (a + ad) + 0j
    ops["x1"], ops["p1"] = -1j * ops["x1h"], 1j * ops["p1h"]
    ops["x2"], ops["p2"] = ops["x2h"], ops["p2h"]
    return ops


def canonical_operators(ops: dict[str, np.ndarray], params: OscillatorParams) -> list[np.ndarray]:
    """``[q1, q2, Pi1, Pi2]`` assembled from the mode operators through the decoupling map."""
    S = normal_mode_map(params).matrix
    gens = [ops["x1"], ops["x2"], ops["p1"], ops["p2"]]
    return [sum(S[i, j] * gens[j] for j in range(4)) for i in range(4)]


def mode_hamiltonian(ops: dict[str, np.ndarray], params: OscillatorParams, primed: bool = False) -> np.ndarray:
    """Decoupled Hamiltonian: ghost form with ``primed=False``, positive form with ``primed=True``.

    The positive form uses ``x1' = i x1``, ``p1' = -i p1``.
    """
    m = params.m
    w1s, w2s = frequency_squares(params)
    osc2 = ops["p2"] @ ops["p2"] / (2 * m) + m * w2s * ops["x2"] @ ops["x2"] / 2
    if primed:
        x1p, p1p = 1j * ops["x1"], -1j * ops["p1"]
        return p1p @ p1p / (2 * m) + m * w1s * x1p @ x1p / 2 + osc2
    return osc2 - (ops["p1"] @ ops["p1"] / (2 * m) + m * w1s * ops["x1"] @ ops["x1"] / 2)


@dataclass
class PositiveSchemeReport:
    eigen_rel_err: float
    lowest: float
    expected_lowest: float
    ghost_vs_positive_diff: float
    plus_adjoint_defect: float
    star_hermitian_defect: float
    primed_hermitian_defect: float
    physical_norms_positive: bool
    ccr_defect: float

    @property
    def passed(self) -> bool:
        return (self.eigen_rel_err <= 1e-10 and self.ghost_vs_positive_diff <= 1e-10
                and self.plus_adjoint_defect <= 1e-12 and self.star_hermitian_defect <= 1e-12
                and self.primed_hermitian_defect <= 1e-12 and self.physical_norms_positive
                and self.ccr_defect <= 1e-10)


def positive_hamiltonian_check(params: OscillatorParams, basis: FockBasis = FockBasis(20)) -> PositiveSchemeReport:
    """Indefinite-metric quantization on a truncation.

    Checks the adjoint signs, the star-hermiticity of the coordinates, that the ghost
    and positive Hamiltonians are the same matrix, and that the positive form's
    spectrum reproduces ``hbar w1 (n1 + 1/2) + hbar w2 (n2 + 1/2)`` on the interior.
    """
    ops = build_mode_operators(basis, params)
    eta = eta_metric(basis)
    w1, w2 = (math.sqrt(v) for v in frequency_squares(params))
    hbar = params.hbar

    plus = max(np.abs(dagger(ops["x1"]) + ops["x1"]).max(), np.abs(dagger(ops["p1"]) + ops["p1"]).max(),
               np.abs(dagger(ops["x2"]) - ops["x2"]).max(), np.abs(dagger(ops["p2"]) - ops["p2"]).max())
    star = max(np.abs(star_conjugate(ops[k], eta) - ops[k]).max() for k in ("x1", "p1", "x2", "p2"))
    primed = max(np.abs(dagger(1j * ops["x1"]) - 1j * ops["x1"]).max(),
                 np.abs(dagger(-1j * ops["p1"]) + 1j * ops["p1"]).max())

    h_ghost = mode_hamiltonian(ops, params)
    h_pos = mode_hamiltonian(ops, params, primed=True)
    diff = float(np.abs(h_ghost - h_pos).max())

    inner = basis.interior()
    qs = canonical_operators(ops, params)
    ccr = 0.0
    for i in range(2):
        for j in range(2):
            c = commutator(qs[i], qs[2 + j])[np.ix_(inner, inner)]
            target = 1j * hbar * np.eye(len(inner)) if i == j else 0.0
            ccr = max(ccr, float(np.abs(c - target).max()))

    evals = np.linalg.eigvalsh((h_pos + dagger(h_pos)) / 2)
    expected = sorted(hbar * (w1 * (n1 + 0.5) + w2 * (n2 + 0.5)) for n1, n2 in (basis.states[i] for i in inner))
    pool = list(evals)
    worst = 0.0
    for e in expected:
        j = int(np.argmin(np.abs(np.asarray(pool) - e)))
        worst = max(worst, abs(pool.pop(j) - e) / e)

    phys = all(eta.signs[basis.index[(n1, n2)]] == 1 for n1, n2 in basis.states if n1 % 2 == 0)
    return PositiveSchemeReport(
        eigen_rel_err=worst, lowest=float(evals.min()), expected_lowest=hbar * (w1 + w2) / 2,
        ghost_vs_positive_diff=diff, plus_adjoint_defect=float(plus), star_hermitian_defect=float(star),
        primed_hermitian_defect=float(primed), physical_norms_positive=phys, ccr_defect=ccr,
    )


# --- adjoint blow-up near the degenerate point --------------------------------------------


def plus_adjoint_map(params: OscillatorParams) -> np.ndarray:
    """Linear action of the plus-conjugation on ``(q1, q2, Pi1, Pi2)``.

    In the decoupled variables it is ``diag(-1, 1, -1, 1)``; row ``i`` gives the
    coefficients of ``(q_i)^+`` in the fixed canonical operators.
    """
    S = normal_mode_map(params).matrix
    return S @ np.diag([-1.0, 1.0, -1.0, 1.0]) @ np.linalg.inv(S)


@dataclass
class BlowupRow:
    epsilon: float
    leading: float
    q2_coeff: float
    Pi1_coeff: float
    Pi2_residual: float
    involution_defect: float
    map_leading: float


@dataclass
class BlowupReport:
    rows: list[BlowupRow] = field(default_factory=list)
    slope: float = float("nan")


def adjoint_blowup_scan(epsilon_list, basis: FockBasis = FockBasis(12), m: float = 1.0, omega: float = 1.0,
                        hbar: float = 1.0) -> BlowupReport:
    """Expand ``(q1)^+`` in the operators ``q1, q2, Pi1, Pi2`` as the frequencies merge.

    For each epsilon the operators are built as matrices on the truncation, ``q1`` is
    plus-conjugated, and the result is least-squares fitted on the interior block to
    the four canonical operators. ``leading`` is the coefficient of ``q1``, which
    multiplies the divergent combination ``q1 - 2 Pi2 / m``. ``Pi2_residual`` is
    ``c_Pi2 + 2 c_q1 / m``.
    """
    report = BlowupReport()
    inner = basis.interior()
    for eps in epsilon_list:
        params = params_from_epsilon(m, omega, hbar, eps)
        ops = build_mode_operators(basis, params)
        qs = canonical_operators(ops, params)
        q1_plus = dagger(qs[0])
        block = np.ix_(inner, inner)
        design = np.stack([g[block].ravel() for g in qs], axis=1)
        coeffs, *_ = np.linalg.lstsq(design, q1_plus[block].ravel(), rcond=None)
        coeffs = coeffs.real
        lead = coeffs[0]
        inv = float(np.abs(dagger(q1_plus) - qs[0]).max())
        report.rows.append(BlowupRow(
            epsilon=eps, leading=float(lead), q2_coeff=float(coeffs[1]), Pi1_coeff=float(coeffs[2]),
            Pi2_residual=float(coeffs[3] + 2 * lead / m), involution_defect=inv,
            map_leading=float(plus_adjoint_map(params)[0, 0]),
        ))
    eps = np.array([r.epsilon for r in report.rows])
    lead = np.abs([r.leading for r in report.rows])
    if len(eps) >= 2:
        report.slope = float(np.polyfit(np.log(eps), np.log(lead), 1)[0])
    return report


# --- degenerate limiting algebra, float engine --------------------------------------------


def degenerate_algebra(mu: float = 1.0, basis: FockBasis = FockBasis(40), omega: float = 1.0) -> dict[str, np.ndarray]:
    """Float matrices for the merged-frequency algebra in the tau-metric Hilbert space.

    ``A1, A2`` are standard ladders; the indefinite conjugation is ``X* = tau X^+ tau``
    with ``tau = (-1)^N2``. ``a = sqrt(mu/2)(A1 + A2)`` and ``b = sqrt(mu/2)(A1 - A2)``.
    ``H_ab`` is built from ``a, b`` and ``H`` directly from ``A1, A2``.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    tau = tau_metric(basis)
    A1, A2 = annihilation(basis, 1), annihilation(basis, 2)
    c = math.sqrt(mu / 2)
    a, b = c * (A1 + A2), c * (A1 - A2)

    def star(x):
        return star_conjugate(x, tau)

    H_ab = (omega / mu) * (2 * star(b) @ b + star(a) @ b + star(b) @ a)
    H = omega * (2 * A1.T @ A1 - A1.T @ A2 + A2.T @ A1)
    return {"a": a, "b": b, "A1": A1, "A2": A2, "H": H, "H_ab": H_ab, "tau": tau.matrix}


# --- exact engine -------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactOperator:
    """``scale * matrix`` with a rational scale and an integer sparse matrix in the monomial basis."""

    basis: FockBasis
    matrix: sp.csr_matrix
    scale: Fraction = Fraction(1)

    def _int_parts(self, other: "ExactOperator"):
        den = self.scale.denominator * other.scale.denominator
        left = self.matrix * (self.scale.numerator * other.scale.denominator)
        right = other.matrix * (other.scale.numerator * self.scale.denominator)
        return left, right, Fraction(1, den)

    def __add__(self, other: "ExactOperator") -> "ExactOperator":
        left, right, scale = self._int_parts(other)
        return ExactOperator(self.basis, (left + right).tocsr(), scale)

    def __sub__(self, other: "ExactOperator") -> "ExactOperator":
        left, right, scale = self._int_parts(other)
        return ExactOperator(self.basis, (left - right).tocsr(), scale)

    def __neg__(self) -> "ExactOperator":
        return ExactOperator(self.basis, self.matrix, -self.scale)

    def __matmul__(self, other: "ExactOperator") -> "ExactOperator":
        return ExactOperator(self.basis, (self.matrix @ other.matrix).tocsr(), self.scale * other.scale)

    def __mul__(self, factor) -> "ExactOperator":
        return ExactOperator(self.basis, self.matrix, self.scale * Fraction(factor))

    __rmul__ = __mul__

    def block(self, rows: np.ndarray, cols: np.ndarray | None = None) -> sp.csr_matrix:
        cols = rows if cols is None else cols
        return self.matrix[rows][:, cols]

    def equals_on(self, other: "ExactOperator", cols: np.ndarray) -> bool:
        """Exact equality of all matrix columns in ``cols`` (images of interior states)."""
        left, right, _ = self._int_parts(other)
        diff = (left - right)[:, cols]
        return diff.count_nonzero() == 0

    def is_zero_on(self, cols: np.ndarray) -> bool:
        return self.scale == 0 or self.matrix[:, cols].count_nonzero() == 0


def exact_identity(basis: FockBasis) -> ExactOperator:
    return ExactOperator(basis, sp.identity(basis.dim, dtype=np.int64, format="csr"))


def exact_lowering(basis: FockBasis, mode: int) -> ExactOperator:
    """``A_mode (A1^+)^n1 (A2^+)^n2 |0> = n_mode * (lowered monomial)``."""
    rows, cols, vals = [], [], []
    for j, (n1, n2) in enumerate(basis.states):
        occ = n1 if mode == 1 else n2
        if occ:
            rows.append(basis.index[(n1 - 1, n2) if mode == 1 else (n1, n2 - 1)])
            cols.append(j)
            vals.append(occ)
    mat = sp.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=(basis.dim, basis.dim))
    return ExactOperator(basis, mat)


def exact_raising(basis: FockBasis, mode: int) -> ExactOperator:
    """Raising on monomials has unit coefficients; the edge layer maps out of the truncation."""
    rows, cols = [], []
    for j, (n1, n2) in enumerate(basis.states):
        target = (n1 + 1, n2) if mode == 1 else (n1, n2 + 1)
        if target in basis.index:
            rows.append(basis.index[target])
            cols.append(j)
    mat = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(basis.dim, basis.dim))
    return ExactOperator(basis, mat)


def monomial_gram(basis: FockBasis) -> list[int]:
    """Plus-metric norms ``n1! n2!`` of the monomial basis vectors."""
    return [math.factorial(n1) * math.factorial(n2) for n1, n2 in basis.states]


def exact_plus_adjoint(op: ExactOperator) -> ExactOperator:
    """Plus-adjoint in the monomial basis: ``G^-1 X^T G`` with ``G = diag(n1! n2!)``."""
    gram = monomial_gram(op.basis)
    coo = op.matrix.tocoo()
    rows, cols, vals = [], [], []
    for i, j, v in zip(coo.row, coo.col, coo.data):
        # (X^+)_{ji} = X_{ij} G_i / G_j
        num = int(v) * gram[i]
        q, r = divmod(num, gram[j])
        if r:
            raise ValueError("plus-adjoint left the integer lattice; use a rational scale")
        rows.append(j)
        cols.append(i)
        vals.append(q)
    mat = sp.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=op.matrix.shape)
    return ExactOperator(op.basis, mat, op.scale)


def exact_tau(basis: FockBasis) -> ExactOperator:
    signs = tau_metric(basis).signs.astype(np.int64)
    return ExactOperator(basis, sp.diags(signs, format="csr", dtype=np.int64))


def exact_star(op: ExactOperator) -> ExactOperator:
    tau = exact_tau(op.basis)
    return tau @ exact_plus_adjoint(op) @ tau


@dataclass
class ExactAlgebra:
    basis: FockBasis
    A1: ExactOperator
    A2: ExactOperator
    A1p: ExactOperator
    A2p: ExactOperator

    @property
    def N(self) -> ExactOperator:
        return self.A1p @ self.A1 + self.A2p @ self.A2

    def hamiltonian(self, omega=1) -> ExactOperator:
        """``omega (2 A1^+ A1 - A1^+ A2 + A2^+ A1)``."""
        return (2 * (self.A1p @ self.A1) - self.A1p @ self.A2 + self.A2p @ self.A1) * omega

    def hamiltonian_plus(self, omega=1) -> ExactOperator:
        return (2 * (self.A1p @ self.A1) - self.A2p @ self.A1 + self.A1p @ self.A2) * omega


def exact_algebra(basis: FockBasis) -> ExactAlgebra:
    return ExactAlgebra(basis, exact_lowering(basis, 1), exact_lowering(basis, 2),
                        exact_raising(basis, 1), exact_raising(basis, 2))


def _commutator(x: ExactOperator, y: ExactOperator) -> ExactOperator:
    return x @ y - y @ x


@dataclass
class AlgebraCheck:
    mu: Fraction
    results: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.results.values())


def check_degenerate_algebra(mu=1, basis: FockBasis = FockBasis(40), omega=1) -> AlgebraCheck:
    """Exact checks of the merged-frequency algebra on interior states.

    ``a = c X_a`` and ``b = c X_b`` with ``c^2 = mu/2`` and integer ``X_a = A1 + A2``,
    ``X_b = A1 - A2``. Every relation tested is bilinear in ``a, b``, so it reduces to
    ``(mu/2)`` times an integer-matrix identity.
    """
    mu = Fraction(mu)
    omega = Fraction(omega)
    if mu <= 0:
        raise ValueError("mu must be positive")
    alg = exact_algebra(basis)
    cols = basis.interior()
    one = exact_identity(basis)
    zero = one * 0
    c2 = mu / 2
    A1s, A2s = exact_star(alg.A1), exact_star(alg.A2)
    Xa, Xb = alg.A1 + alg.A2, alg.A1 - alg.A2
    Xas, Xbs = exact_star(Xa), exact_star(Xb)

    res = {
        "[a,a*]=0": (_commutator(Xa, Xas) * c2).equals_on(zero, cols),
        "[b,b*]=0": (_commutator(Xb, Xbs) * c2).equals_on(zero, cols),
        "[b,a*]=mu": (_commutator(Xb, Xas) * c2).equals_on(one * mu, cols),
        "[a,b*]=mu": (_commutator(Xa, Xbs) * c2).equals_on(one * mu, cols),
        "[a,b]=0": (_commutator(Xa, Xb) * c2).equals_on(zero, cols),
        "[A1,A1*]=1": _commutator(alg.A1, A1s).equals_on(one, cols),
        "[A2,A2*]=-1": _commutator(alg.A2, A2s).equals_on(-one, cols),
        "[A1,A2*]=0": _commutator(alg.A1, A2s).equals_on(zero, cols),
        "[A1,A2]=0": _commutator(alg.A1, alg.A2).equals_on(zero, cols),
        "[A1*,A2*]=0": _commutator(A1s, A2s).equals_on(zero, cols),
        "A1^+=A1*": exact_plus_adjoint(alg.A1).equals_on(A1s, cols),
        "A2^+=-A2*": exact_plus_adjoint(alg.A2).equals_on(-A2s, cols),
    }
    H_ab = (Xbs @ Xb * 2 + Xas @ Xb + Xbs @ Xa) * (omega / mu * c2)
    H_star = (A1s @ alg.A1 * 2 - A1s @ alg.A2 - A2s @ alg.A1) * omega
    H_plus = alg.hamiltonian(omega)
    res["H(a,b)=H(A*)"] = H_ab.equals_on(H_star, cols)
    res["H(A*)=H(A+)"] = H_star.equals_on(H_plus, cols)
    return AlgebraCheck(mu, res)


def check_structure_identities(basis: FockBasis = FockBasis(40)) -> dict[str, bool]:
    """``[H, N] = 0``, ``[H, A1^+ + A2^+] = A1^+ + A2^+`` and ``H^+`` from the generic adjoint."""
    alg = exact_algebra(basis)
    cols = basis.interior()
    H = alg.hamiltonian()
    raise_sum = alg.A1p + alg.A2p
    return {
        "[H,N]=0": _commutator(H, alg.N).is_zero_on(cols),
        "[H,A1+ + A2+]=A1+ + A2+": _commutator(H, raise_sum).equals_on(raise_sum, cols),
        "H^+ (generic) = H^+ (ladder)": exact_plus_adjoint(H).equals_on(alg.hamiltonian_plus(), cols),
    }


# --- Jordan structure on fixed-N subspaces ----------------------------------------------


def _layer_matrix(op: ExactOperator, n: int) -> list[list[int]]:
    idx = op.basis.layer(n)
    block = op.matrix[idx][:, idx].toarray()
    if op.scale.denominator != 1:
        raise ValueError("layer matrix needs an integer scale")
    s = op.scale.numerator
    return [[int(v) * s for v in row] for row in block]


def hamiltonian_layer(n: int) -> list[list[int]]:
    """``H / omega`` on the ``N = n`` layer in the monomial basis ``|k, n-k)``.

    Rows and columns are ordered ``k = n, n-1, ..., 0`` (``k`` = A1 occupation), as in
    ``FockBasis``.
    """
    basis = FockBasis(n + 1)
    return _layer_matrix(exact_algebra(basis).hamiltonian(), n)


def _matmul(a: list[list[int]], b: list[list[int]]) -> list[list[int]]:
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def fraction_free_rank(matrix: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free elimination.

    Each update ``r <- (p/g) r - (f/g) pivot_row`` stays in the integers, and the row
    content is divided out afterwards; both steps preserve the row space. Rows with a
    zero in the pivot column are skipped, which keeps banded matrices cheap.
    """
    rows = [list(r) for r in matrix if any(r)]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pr = rows[rank]
        p = pr[col]
        support = [j for j in range(col, ncols) if pr[j]]
        for i in range(rank + 1, len(rows)):
            r = rows[i]
            f = r[col]
            if not f:
                continue
            g = math.gcd(p, f)
            new = [(p // g) * v for v in r]
            for j in support:
                new[j] -= (f // g) * pr[j]
            c = math.gcd(*new)
            rows[i] = [v // c for v in new] if c > 1 else new
        rank += 1
        if rank == len(rows):
            break
    return rank


def integer_kernel(matrix: list[list[int]]) -> list[list[int]]:
    """Basis of the rational null space, each vector scaled to primitive integers."""
    m = [[Fraction(v) for v in row] for row in matrix]
    nrows, ncols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        support = [j for j in range(ncols) if m[r][j]]
        for i in range(nrows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                for j in support:
                    m[i][j] -= f * m[r][j]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    free = [c for c in range(ncols) if c not in pivots]
    out = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for row, pc in enumerate(pivots):
            vec[pc] = -m[row][fc]
        den = math.lcm(*(v.denominator for v in vec))
        ints = [int(v * den) for v in vec]
        g = math.gcd(*ints)
        ints = [v // g for v in ints]
        if next(v for v in ints if v) < 0:
            ints = [-v for v in ints]
        out.append(ints)
    return out


@dataclass
class JordanReport:
    n: int
    dimension: int
    rank_sequence: list[int]
    nilpotency_index: int
    eigenvector: list[int]
    is_single_block: bool
    matches_chain: bool

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dimension": self.dimension,
            "rank_sequence": self.rank_sequence,
            "nilpotency_index": self.nilpotency_index,
            "eigenvector": [str(v) for v in self.eigenvector],
            "is_single_block": self.is_single_block,
            "matches_chain": self.matches_chain,
        }


def _tridiagonal_power_step(power: list[list[int]], M: list[list[int]]) -> list[list[int]]:
    """``power @ M`` for tridiagonal ``M`` in O(dim^2) big-integer operations."""
    dim = len(M)
    out = []
    for row in power:
        new = []
        for j in range(dim):
            acc = 0
            for i in (j - 1, j, j + 1):
                if 0 <= i < dim and M[i][j]:
                    acc += row[i] * M[i][j]
            new.append(acc)
        out.append(new)
    return out


def jordan_analysis(n: int) -> JordanReport:
    """Exact Jordan structure of ``H`` on the ``N = n`` layer.

    ``M = H/omega - n`` is tridiagonal with integer entries in the monomial basis.
    Its powers are formed exactly and each is ranked by fraction-free elimination.
    """
    if not 0 <= n <= 64:
        raise ValueError("jordan_analysis supports 0 <= n <= 64")
    H = hamiltonian_layer(n)
    dim = n + 1
    M = [[H[i][j] - (n if i == j else 0) for j in range(dim)] for i in range(dim)]
    if any(M[i][j] for i in range(dim) for j in range(dim) if abs(i - j) > 1):
        raise AssertionError("layer Hamiltonian is not tridiagonal")
    power = [[int(i == j) for j in range(dim)] for i in range(dim)]
    ranks = [dim]
    nil_index = -1
    for j in range(1, dim + 2):
        power = _tridiagonal_power_step(power, M)
        ranks.append(fraction_free_rank(power))
        if ranks[-1] == 0:
            nil_index = j
            break
    kernel = integer_kernel(M)
    eigvec = kernel[0] if len(kernel) == 1 else []
    # layer order is k = n..0 (A1 occupation); the chain vector is binom(n, k) there
    chain = [math.comb(n, k) for k in range(n, -1, -1)]
    single = ranks == list(range(dim, -1, -1))
    return JordanReport(n=n, dimension=dim, rank_sequence=ranks, nilpotency_index=nil_index,
                        eigenvector=eigvec, is_single_block=single, matches_chain=eigvec == chain)


def jordan_table(max_n: int, workers: int = 1) -> list[JordanReport]:
    """Reports for every layer ``0..max_n``; layers are independent blocks."""
    if not 0 <= max_n <= 64:
        raise ValueError("max_n must lie in [0, 64]")
    ns = list(range(max_n + 1))
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return list(pool.map(jordan_analysis, ns))
    return [jordan_analysis(n) for n in ns]


def normality_defect(n: int) -> int:
    """Largest absolute entry of ``[H, H^+] / omega^2`` on the ``N = n`` layer (monomial basis)."""
    basis = FockBasis(n + 1)
    alg = exact_algebra(basis)
    H = _layer_matrix(alg.hamiltonian(), n)
    Hp = _layer_matrix(exact_plus_adjoint(alg.hamiltonian()), n)
    comm = [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(_matmul(H, Hp), _matmul(Hp, H))]
    return max((abs(v) for row in comm for v in row), default=0)


# --- eigenvectors and their norms -----------------------------------------------------------


def _squarefree_split(value: int) -> tuple[int, int]:
    """``value = outer^2 * radicand`` with square-free ``radicand``."""
    outer, rad = 1, 1
    d = 2
    v = value
    while d * d <= v:
        e = 0
        while v % d == 0:
            v //= d
            e += 1
        outer *= d ** (e // 2)
        rad *= d ** (e % 2)
        d += 1
    rad *= v
    return outer, rad


@dataclass(frozen=True)
class ChainVector:
    """``(A1^+ + A2^+)^n |0,0>`` in the orthonormal basis.

    ``coefficients[k] = (integer, radicand)`` is the amplitude ``integer * sqrt(radicand)``
    on ``|k, n - k>``.
    """

    n: int
    coefficients: tuple[tuple[int, int], ...]
    monomial: tuple[int, ...]

    def as_float(self) -> np.ndarray:
        return np.array([c * math.sqrt(r) for c, r in self.coefficients])

    def squared_amplitudes(self) -> list[int]:
        return [c * c * r for c, r in self.coefficients]


def chain_eigenvector(n: int) -> ChainVector:
    if n < 0:
        raise ValueError("n must be non-negative")
    coeffs = []
    for k in range(n + 1):
        outer, rad = _squarefree_split(math.factorial(k) * math.factorial(n - k))
        coeffs.append((math.comb(n, k) * outer, rad))
    return ChainVector(n, tuple(coeffs), tuple(math.comb(n, k) for k in range(n + 1)))


def verify_chain_eigenvector(n: int) -> bool:
    """``H |n> = n omega |n>`` exactly, using the monomial-basis coordinates ``binom(n, k)``."""
    H = hamiltonian_layer(n)
    vec = [math.comb(n, k) for k in range(n, -1, -1)]
    image = [sum(h * v for h, v in zip(row, vec)) for row in H]
    return image == [n * v for v in vec]


def zero_norm(n: int) -> int:
    """Tau-metric norm ``sum_k binom(n,k)^2 k! (n-k)! (-1)^(n-k)`` of the chain eigenvector."""
    if not 0 <= n <= 64:
        raise ValueError("zero_norm supports 0 <= n <= 64")
    vec = chain_eigenvector(n)
    return sum(sq * (-1) ** (n - k) for k, sq in enumerate(vec.squared_amplitudes()))


def zero_norm_formula(n: int) -> int:
    """Closed expression ``n! sum_k binom(n,k) (-1)^(n-k)``."""
    return math.factorial(n) * sum(math.comb(n, k) * (-1) ** (n - k) for k in range(n + 1))
