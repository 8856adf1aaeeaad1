"""Command-line entry point ``sincspec``.

Exit status: 0 on success, 2 on a usage error, 1 on a numerical or I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys

import numpy as np

from sincspec import experiments, metrics
from sincspec.eigensolve import NumericalError
from sincspec.experiments import ExperimentConfig, ExperimentReport
from sincspec.randmat import build_A, build_H, write_matrix_csv
from sincspec.kernels import SincKernel
from sincspec.sampling import trial_sample
from sincspec.sinc_operator import gauss_legendre, minimum_quad_order, sinc_operator_spectrum

SEED_ENV = "SINCSPEC_SEED"
U64_MAX = 2**64 - 1

EXPERIMENTS = {
    "table2": experiments.run_table2,
    "coverage": experiments.run_coverage,
    "table3": experiments.run_table3,
    "figures": experiments.run_figures,
    "dof": experiments.run_dof,
}
# command-specific lower bounds on --trials
MIN_TRIALS = {"coverage": 100, "dof": metrics.MIN_RANDOMIZED_TRIALS}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _m_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}")


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an unsigned 64-bit integer, got {text!r}")
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed out of range [0, 2^64-1]: {v}")
    return v


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"sincspec: error: environment variable {SEED_ENV}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sincspec", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_flags(p, default_format="csv"):
        p.add_argument("--format", choices=("csv", "json"), default=default_format)
        p.add_argument("--out", help="output path (default: standard output)")

    p = sub.add_parser("spectrum", help="Nystrom spectrum of Q_m as CSV (index,lambda)")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--quad-order", type=int)
    output_flags(p)

    p = sub.add_parser("quadrature", help="Gauss-Legendre rule on [-1/2, 1/2]")
    p.add_argument("--quad-order", type=int, required=True)
    output_flags(p)

    p = sub.add_parser("compare", help="one draw of lambda(A*A), lambda(H) against lambda(Q_m)")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--quad-order", type=int)
    p.add_argument("--dump-matrix", help="write the drawn matrix to this CSV path")
    p.add_argument("--dump-kind", choices=("A", "H"), default="A")
    output_flags(p)

    p = sub.add_parser("capacity", help="one draw of log det(I + (np/m) A*A) with its approximations")
    p.add_argument("--m", type=_m_list, default=[4.0])
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--p", type=float, help="total power (default: n)")
    p.add_argument("--xi", type=float, default=1.63)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--trial", type=int, default=0)
    output_flags(p)

    for name, desc in (("table2", "relative l2 spectral errors"),
                       ("coverage", "empirical coverage of the concentration bounds"),
                       ("table3", "capacity at scale n^2/m"),
                       ("figures", "spectra for plotting"),
                       ("dof", "degrees of freedom")):
        p = sub.add_parser(name, help=desc)
        p.add_argument("--m", type=_m_list, default=[4.0])
        p.add_argument("--n", type=int, default=300)
        p.add_argument("--trials", type=int, default=100 if name == "coverage" else 50)
        p.add_argument("--xi", type=float, default=1.63)
        p.add_argument("--seed", type=_seed)
        p.add_argument("--quad-order", type=int)
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        if name == "table3":
            p.add_argument("--p", type=float, help="total power (default: n, i.e. scale n^2/m)")
        output_flags(p)
    return parser


def _validate(args) -> None:
    def bad(flag, msg):
        raise UsageError(f"sincspec {args.command}: error: argument {flag}: {msg}")

    ms = args.m if isinstance(getattr(args, "m", None), list) else [getattr(args, "m", None)]
    if getattr(args, "m", None) is not None:
        if not ms:
            bad("--m", "at least one value is required")
        for m in ms:
            if not (math.isfinite(m) and m >= 1):
                bad("--m", f"must be >= 1, got {m:g}")
    n = getattr(args, "n", None)
    if n is not None:
        if n < 1:
            bad("--n", f"must be >= 1, got {n}")
        for m in ms:
            if m is not None and m > n:
                bad("--n", f"must be >= m (got n={n}, m={m:g})")
    trials = getattr(args, "trials", None)
    if trials is not None:
        lo = MIN_TRIALS.get(args.command, 1)
        if trials < lo:
            bad("--trials", f"must be >= {lo} for {args.command}, got {trials}")
    xi = getattr(args, "xi", None)
    if xi is not None and not xi > 0:
        bad("--xi", f"must be positive, got {xi}")
    K = getattr(args, "quad_order", None)
    if K is not None:
        if K < 1:
            bad("--quad-order", f"must be >= 1, got {K}")
        if args.command != "quadrature":
            for m in ms:
                if K < minimum_quad_order(m):
                    bad("--quad-order", f"must be >= {minimum_quad_order(m)} for m={m:g}")
    if getattr(args, "workers", 1) < 1:
        bad("--workers", f"must be >= 1, got {args.workers}")
    if getattr(args, "trial", 0) < 0:
        bad("--trial", f"must be >= 0, got {args.trial}")
    p = getattr(args, "p", None)
    if p is not None and not p > 0:
        bad("--p", f"must be positive, got {p}")
    if getattr(args, "seed", 0) is None:
        args.seed = _default_seed()


def _write(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)


def emit_report(report: ExperimentReport, fmt: str, sink=None) -> None:
    """Write a finalized report as CSV or JSON to ``sink`` (path or stdout)."""
    _write(report.to_csv() if fmt == "csv" else report.to_json(), sink)


def _table(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([experiments._fmt(v) for v in row])
    return buf.getvalue()


def _emit_table(columns, rows, fmt, out, extra=None) -> None:
    if fmt == "csv":
        _write(_table(columns, rows), out)
    else:
        doc = dict(extra or {})
        doc["rows"] = [dict(zip(columns, experiments._jsonable(list(r)))) for r in rows]
        _write(json.dumps(doc, indent=2) + "\n", out)


def _cmd_spectrum(args):
    spec = sinc_operator_spectrum(args.m, args.quad_order)
    _emit_table(("index", "lambda"), list(enumerate(spec.values.tolist())), args.format, args.out,
                {"m": args.m, "quad_order": len(spec)})


def _cmd_quadrature(args):
    rule = gauss_legendre(args.quad_order)
    rows = [(i, x, w) for i, (x, w) in enumerate(zip(rule.nodes.tolist(), rule.weights.tolist()))]
    _emit_table(("index", "node", "weight"), rows, args.format, args.out, {"quad_order": rule.order})


def _cmd_compare(args):
    m, n = args.m, args.n
    Z, Y = trial_sample(args.seed, args.trial, n)
    A = build_A(m, Z, Y)
    H = build_H(SincKernel(m), Y)
    if args.dump_matrix:
        write_matrix_csv(args.dump_matrix, A if args.dump_kind == "A" else H, m, args.dump_kind)
    from sincspec.eigensolve import eig_hermitian, eig_symmetric
    from sincspec.randmat import gram

    la = eig_hermitian(gram(A), "A*A", m=m)
    lh = eig_symmetric(H, "H", m=m)
    q = sinc_operator_spectrum(m, args.quad_order).padded(n)
    dist = {
        "err_AH": metrics.l2_spectral_distance(la, lh, n) / math.sqrt(m),
        "err_HQ": metrics.l2_spectral_distance(lh, q, n) / math.sqrt(m),
        "err_AQ": metrics.l2_spectral_distance(la, q, n) / math.sqrt(m),
        "sqrt_m_over_n": math.sqrt(m / n),
    }
    rows = [(j, la[j], lh[j], q[j]) for j in range(n)]
    _emit_table(("index", "lambda_AA", "lambda_H", "lambda_Q"), rows, args.format, args.out,
                {"m": m, "n": n, "seed": args.seed, "trial": args.trial, "relative_errors": dist})


def _cmd_capacity(args):
    n = args.n
    p = float(n) if args.p is None else args.p
    Z, Y = trial_sample(args.seed, args.trial, n)
    rows = []
    for m in args.m:
        C = metrics.capacity_matrix(build_A(m, Z, Y), p, m=m)
        ap = metrics.capacity_approx(m, n, p)
        E, Er = ap.errors(C)
        rows.append((m, n, p, C, ap.approx, ap.tilde, E, Er, metrics.mcdiarmid_capacity_band(n, p, args.xi)))
    _emit_table(("m", "n", "p", "C_A", "C_approx", "C_tilde", "E_m", "Er_m", "band"), rows, args.format,
                args.out, {"seed": args.seed, "trial": args.trial, "xi": args.xi})


def _cmd_experiment(args):
    cfg = ExperimentConfig(ms=tuple(args.m), n=args.n, trials=args.trials, xi=args.xi,
                           quad_order=args.quad_order, seed=args.seed, workers=args.workers,
                           p=getattr(args, "p", None))
    report = EXPERIMENTS[args.command](cfg)
    emit_report(report, args.format, args.out)


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "quadrature": _cmd_quadrature,
    "compare": _cmd_compare,
    "capacity": _cmd_capacity,
    **{name: _cmd_experiment for name in EXPERIMENTS},
}


def parse_and_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (NumericalError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"sincspec {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"sincspec {args.command}: I/O error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(parse_and_dispatch())


if __name__ == "__main__":
    main()
