"""Command-line front end: scan tables, exact Jordan reports and the verification suites.

Every table starts with ``#`` lines echoing the full configuration (including the
seed), so a file can be regenerated from its own header. Exit codes: 0 success,
1 verification failure, 2 usage or regime error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import classical, fock, spectra, verify, wavefn
from .core import (OscillatorParams, Regime, RegimeError, classify_regime, epsilon_expansion, frequencies,
                   params_from_epsilon)


class UsageError(Exception):
    pass


def _params(args) -> OscillatorParams:
    if args.epsilon is not None:
        return params_from_epsilon(args.m, args.omega, args.hbar, args.epsilon)
    lam = 0.15 if args.lam is None else args.lam
    return OscillatorParams(m=args.m, omega=args.omega, lam=lam, hbar=args.hbar)


def _header(args) -> list[str]:
    skip = {"func", "out", "format"}
    items = [f"{k}={v}" for k, v in sorted(vars(args).items()) if k not in skip]
    return [f"pu-osc {args.command}", *items]


def _emit(args, columns: list[str], rows: list[list], extra: dict | None = None) -> None:
    """Write rows as CSV with a '#' config header, or as JSON with the same fields."""
    if args.format == "json":
        payload = {"config": {k: v for k, v in sorted(vars(args).items()) if k not in {"func"}},
                   "columns": columns, "rows": [dict(zip(columns, r)) for r in rows]}
        if extra:
            payload.update(extra)
        text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    else:
        buf = io.StringIO()
        for line in _header(args):
            buf.write(f"# {line}\n")
        for k, v in (extra or {}).items():
            buf.write(f"# {k}={v}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in r])
        text = buf.getvalue()
    _write(args, text)


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands -----------------------------------------------------------------------------


def cmd_regime(args) -> int:
    if args.epsilon_grid:
        cols = ["epsilon", "lambda", "regime", "omega1", "omega2", "omega1_first_order", "omega2_first_order",
                "err1", "err2"]
        rows = []
        for eps in args.epsilon_grid:
            p = params_from_epsilon(args.m, args.omega, args.hbar, eps)
            w = frequencies(p)
            a1, a2 = epsilon_expansion(p, eps)
            rows.append([eps, p.lam, classify_regime(p).value, w.omega1, w.omega2, a1, a2,
                         abs(w.omega1 - a1), abs(w.omega2 - a2)])
        _emit(args, cols, rows)
        return 0
    cols = ["lambda", "regime", "omega1", "omega2"]
    rows = []
    for lam in args.lambda_grid:
        try:
            p = OscillatorParams(m=args.m, omega=args.omega, lam=lam, hbar=args.hbar)
        except ValueError as exc:
            rows.append([lam, f"error: {exc}", "", ""])
            continue
        w = frequencies(p)
        rows.append([lam, classify_regime(p).value, _num(w.omega1), _num(w.omega2)])
    _emit(args, cols, rows)
    return 0


def _num(z):
    return z if isinstance(z, float) else str(complex(z))


def cmd_spectrum(args) -> int:
    p = _params(args)
    regime = classify_regime(p)
    if regime is Regime.DEGENERATE:
        rows = [[n, k, spectra.energy_degenerate(spectra.DegenerateLabel(n, k), p)]
                for n in range(-args.nmax, args.nmax + 1) for k in args.k]
        _emit(args, ["n", "k", "E"], rows)
        return 0
    if regime is not Regime.REAL_DISTINCT:
        raise RegimeError(f"spectra are defined for RealDistinct or Degenerate parameters, got {regime.value}")
    rows = []
    for n1 in range(args.nmax + 1):
        for n2 in range(args.nmax + 1):
            q = spectra.QuantumNumbers(n1, n2)
            rows.append([n1, n2, spectra.energy_indefinite(q, p), spectra.energy_positive(q, p)])
    _emit(args, ["n1", "n2", "E_indefinite", "E_positive"], rows)
    return 0


def cmd_schedule(args) -> int:
    p = _params(args)
    sched = spectra.limit_schedule(args.n, args.k[0], p, args.steps)
    rows = spectra.schedule_energies(sched, p)
    cols = ["n1", "n2", "epsilon", "E_disc", "E_eps", "E_total", "E_target", "abs_err"]
    _emit(args, cols, [[r.n1, r.n2, r.epsilon, r.E_disc, r.E_eps, r.E_total, r.E_target, r.abs_err] for r in rows])
    return 0


def cmd_limit_scan(args) -> int:
    p = _params(args)
    grid = wavefn.ScanGrid(args.pmax, args.grid_points, args.theta_samples)
    cols = ["n", "k", "n1", "n2", "epsilon", "sup_err", "l2_err", "prefactor_ratio", "sqrt_eps_slope", "phase_err"]
    out = []
    for k in args.k:
        sched = spectra.limit_schedule(args.n, k, p, args.steps)
        rows = wavefn.limit_scan(sched, p, grid)
        prev = None
        for r in rows:
            slope = "" if prev is None else (math.log(r.prefactor_ratio / prev.prefactor_ratio)
                                             / math.log(r.epsilon / prev.epsilon))
            out.append([args.n, k, r.n1, r.n2, r.epsilon, r.sup_err, r.l2_err, r.prefactor_ratio, slope,
                        r.phase_err])
            prev = r
    _emit(args, cols, out)
    return 0


def cmd_jordan(args) -> int:
    if not 0 <= args.max_n <= 64:
        raise UsageError("--max-n must lie in [0, 64]")
    reports = fock.jordan_table(args.max_n, workers=args.workers)
    records = []
    for r in reports:
        rec = r.to_json()
        rec["zero_norm"] = str(fock.zero_norm(r.n))
        rec["chain_vector"] = [[str(c), str(rad)] for c, rad in fock.chain_eigenvector(r.n).coefficients]
        rec["normality_defect"] = str(fock.normality_defect(r.n)) if r.n <= args.normality_max_n else None
        records.append(rec)
    if args.format == "csv":
        cols = ["n", "dimension", "is_single_block", "nilpotency_index", "rank_sequence", "zero_norm",
                "normality_defect"]
        rows = [[r["n"], r["dimension"], r["is_single_block"], r["nilpotency_index"],
                 " ".join(map(str, r["rank_sequence"])), r["zero_norm"], r["normality_defect"] or ""]
                for r in records]
        _emit(args, cols, rows)
    else:
        payload = {"config": {k: v for k, v in sorted(vars(args).items()) if k != "func"}, "reports": records}
        _write(args, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    ok = all(r.is_single_block and r.matches_chain for r in reports)
    return 0 if ok else 1


def cmd_trajectory(args) -> int:
    p = _params(args)
    jet = classical.JetState(*args.jet)
    w1 = max(abs(frequencies(p).omega1), abs(frequencies(p).omega2))
    dt = args.dt or (2 * math.pi / w1) / 1000
    traj = classical.integrate_eom(jet, p, args.t_end, dt, stride=args.stride)
    rows = [[float(t), *map(float, j), float(h)] for t, j, h in zip(traj.t, traj.jets, traj.energy)]
    err = float(np.abs(traj.jets - traj.exact).max())
    _emit(args, ["t", "q", "qd", "qdd", "qddd", "H"], rows, {"max_abs_error_vs_closed_form": err})
    return 0


def cmd_wavefunction(args) -> int:
    p = _params(args)
    g = np.linspace(-args.pmax, args.pmax, args.grid_points)
    qn = spectra.QuantumNumbers(args.n1, args.n2)
    rows = []
    for x1 in g:
        vals = wavefn.coord_wavefunction(qn, x1, g, p, mixed_frequency=args.mixed_frequency)
        rows.extend([float(x1), float(x2), float(v)] for x2, v in zip(g, vals))
    _emit(args, ["x1", "x2", "psi"], rows)
    return 0


def cmd_verify_all(args) -> int:
    cfg = verify.VerifyConfig(m=args.m, omega=args.omega, lam=0.15 if args.lam is None else args.lam,
                              hbar=args.hbar, mu=args.mu, seed=args.seed, tolerance_scale=args.tolerance_scale)
    if args.epsilon is not None:
        cfg = verify.VerifyConfig(m=args.m, omega=args.omega, lam=params_from_epsilon(
            args.m, args.omega, args.hbar, args.epsilon).lam, hbar=args.hbar, mu=args.mu, seed=args.seed,
            tolerance_scale=args.tolerance_scale)
    results = verify.run_all(cfg, args.suites)
    ok = all(r.passed for r in results)
    if args.json or args.format == "json":
        payload = {"config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
                   "passed": ok, "suites": [r.to_json() for r in results]}
        _write(args, json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n")
    else:
        buf = io.StringIO()
        for line in _header(args):
            buf.write(f"# {line}\n")
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            buf.write(f"[{status}] suite {r.number}: {r.title} ({r.seconds:.2f} s)\n")
            for c in r.checks:
                mark = "ok " if c.passed else "BAD"
                buf.write(f"    {mark} {c.name}: {c.value} ({c.tolerance})\n")
            if r.seconds > r.budget:
                buf.write(f"    BAD runtime {r.seconds:.2f} s exceeds {r.budget} s\n")
        failed = [c.name for r in results for c in r.checks if not c.passed]
        buf.write(f"# {'all suites passed' if ok else 'failing checks: ' + '; '.join(failed)}\n")
        _write(args, buf.getvalue())
    return 0 if ok else 1


# --- parser -------------------------------------------------------------------------------


def _common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--m", type=float, default=1.0, help="mass (default 1)")
    sub.add_argument("--omega", type=float, default=1.0, help="base frequency (default 1)")
    grp = sub.add_mutually_exclusive_group()
    grp.add_argument("--lambda", dest="lam", type=float, help="fourth-order stiffness (default 0.15)")
    grp.add_argument("--epsilon", type=float, help="near-degenerate parameter, 1 - 4 lambda omega^2 = epsilon^2")
    sub.add_argument("--hbar", type=float, default=1.0)
    sub.add_argument("--mu", type=float, default=1.0, help="scale of the merged-frequency a, b operators")
    sub.add_argument("--seed", type=int, default=12345, help="seed for random-point identity tests")
    sub.add_argument("--out", help="output file (default stdout)")
    sub.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pu-osc", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("regime", help="regime and frequencies on a lambda grid",
                        description="Classify lambda values and print both characteristic frequencies "
                                    "omega_{1,2}^2 = (1 +- sqrt(1 - 4 lambda omega^2)) / (2 lambda). With "
                                    "--epsilon-grid, compare against sqrt2 omega (1 +- eps/2).")
    _common(p)
    p.add_argument("--lambda-grid", type=float, nargs="*", default=[-1.0, 0.15, 0.25, 1.0])
    p.add_argument("--epsilon-grid", type=float, nargs="*")
    p.set_defaults(func=cmd_regime)

    p = subs.add_parser("spectrum", help="energy levels of both quantizations, or the continuum at the double root",
                        description="Ghost energies -hbar w1 (n1+1/2) + hbar w2 (n2+1/2) and positive-metric "
                                    "energies hbar w1 (n1+1/2) + hbar w2 (n2+1/2) for n1, n2 <= nmax. At "
                                    "lambda = 1/(4 omega^2) the continuum omega hbar (sqrt2 n - m omega hbar "
                                    "k^2 / 2) for |n| <= nmax and the given k values. --nmax -1 gives an "
                                    "empty table.")
    _common(p)
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--k", type=float, nargs="*", default=[0.5, 1.0, 2.0])
    p.set_defaults(func=cmd_spectrum)

    p = subs.add_parser("schedule", help="energies along the constrained limit schedule",
                        description="Labels with n2 - n1 = n fixed and epsilon (n1 + n2) = m omega hbar k^2 / "
                                    "sqrt2, with exact and first-order energies against the continuum value.")
    _common(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--k", type=float, nargs=1, default=[1.0])
    p.add_argument("--steps", type=int, default=8)
    p.set_defaults(func=cmd_schedule)

    p = subs.add_parser("limit-scan", help="Laguerre eigenfunctions against the Bessel continuum",
                        description="Along the constrained schedule, compare the closed Laguerre momentum "
                                    "wavefunction with sqrt(k/2pi) J_n(kP) after shape normalisation on "
                                    "P in [0, pmax]. sqrt_eps_slope is the local log-log slope of the norm "
                                    "ratio against epsilon, which tends to 1/2.")
    _common(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--k", type=float, nargs="+", default=[1.0])
    p.add_argument("--steps", type=int, default=8)
    p.add_argument("--pmax", type=float, default=10.0)
    p.add_argument("--grid-points", type=int, default=401)
    p.add_argument("--theta-samples", type=int, default=8)
    p.set_defaults(func=cmd_limit_scan)

    p = subs.add_parser("jordan", help="exact Jordan structure and zero norms of the merged-frequency Hamiltonian",
                        description="For each total occupation n <= max-n: ranks of (H - n omega)^j in exact "
                                    "integers, the single eigenvector (A1^+ + A2^+)^n |0>, its vanishing "
                                    "tau-norm and the normality defect [H, H^+]. JSON by default; big "
                                    "integers are written as decimal strings.")
    _common(p)
    p.set_defaults(format="json")
    p.add_argument("--max-n", type=int, default=20)
    p.add_argument("--normality-max-n", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_jordan)

    p = subs.add_parser("trajectory", help="RK4 trajectory of the fourth-order equation of motion",
                        description="Integrate lambda q'''' + q'' + omega^2 q = 0 from a jet (q, q', q'', q''') "
                                    "and record the Ostrogradski energy. CSV columns t,q,qd,qdd,qddd,H.")
    _common(p)
    p.add_argument("--jet", type=float, nargs=4, default=[1.0, 0.0, 0.0, 0.0])
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int, default=10)
    p.set_defaults(func=cmd_trajectory)

    p = subs.add_parser("wavefunction", help="coordinate-space eigenfunction on a square grid",
                        description="Product of oscillator eigenfunctions at omega1 and omega2. "
                                    "--mixed-frequency evaluates the second Hermite factor at omega1, "
                                    "which breaks the eigen-equation; kept for comparison.")
    _common(p)
    p.add_argument("--n1", type=int, default=0)
    p.add_argument("--n2", type=int, default=0)
    p.add_argument("--pmax", type=float, default=3.0, help="half-width of the coordinate grid")
    p.add_argument("--grid-points", type=int, default=21)
    p.add_argument("--mixed-frequency", action="store_true")
    p.set_defaults(func=cmd_wavefunction)

    p = subs.add_parser("verify-all", help="run every invariant suite; exit 0 iff all pass",
                        description="Suites: 1 regimes, 2 canonical maps, 3 dynamics, 4 spectra, 5 eigen-"
                                    "residuals, 6 quadrature vs closed Laguerre form, 7 equal-frequency limit, "
                                    "8 sqrt(eps) prefactor, 9 adjoint blow-up, 10 merged-frequency algebra, "
                                    "11 exact Jordan and zero-norm theorems.")
    _common(p)
    p.add_argument("--suites", type=int, nargs="*", choices=range(1, 12))
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply every numeric tolerance (values < 1 tighten)")
    p.add_argument("--json", action="store_true", help="machine-readable results")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, RegimeError, ValueError) as exc:
        print(f"pu-osc {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
