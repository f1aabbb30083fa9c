"""Command-line interface.

    ulbound bound   --n 4 --N 24 --potential newton
    ulbound table   --n 4 --N-range 5:64 --potential newton [--reference energies.csv]
    ulbound curve   --n 4 --tau-max 6 --steps 400
    ulbound testfn  --n 4 --N 24 --j-max 20
    ulbound verdict --n 10 --N 40
    ulbound energy  --code d4 --potential newton
    ulbound improve --n 4 --N 24 --potential newton --j 8

Every command accepts ``--format text|csv|json`` and ``--output PATH``.
Exit codes: 0 success, 1 usage error, 2 certificate failure, 3 I/O error.
``ULB_TOL`` in the environment overrides the certification tolerance.
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
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bounds import BoundError, dgs_bound, interval, levenshtein_curve
from .codes import CodeError, CodeFormatError, compare_energy, configuration_quadrature, parse_code
from .potentials import PotentialError, parse_potential
from .quadrature import QuadratureError, build_rule
from .testfn import NEG_TOL, improve_bound, lp_optimality_verdict, test_functions
from .ulb import FEAS_TOL, ulb

log = logging.getLogger("ulbound")

EXIT_OK, EXIT_USAGE, EXIT_CERT, EXIT_IO = 0, 1, 2, 3
CSV_DIGITS, TEXT_DIGITS = 12, 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class Result:
    columns: list
    rows: list
    payload: dict
    summary: list = field(default_factory=list)
    certified: bool = True


def _round(x, digits: int):
    if isinstance(x, (bool, np.bool_)) or x is None:
        return bool(x) if isinstance(x, np.bool_) else x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{digits}g}")
    if isinstance(x, dict):
        return {k: _round(v, digits) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_round(v, digits) for v in x]
    return x


def _cell(x, digits: int) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{digits}g}"
    return str(x)


def render(result: Result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_round(result.payload, CSV_DIGITS), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(result.columns)
        for row in result.rows:
            w.writerow([_cell(x, CSV_DIGITS) for x in row])
        return buf.getvalue()
    cells = [[_cell(x, TEXT_DIGITS) for x in row] for row in result.rows]
    widths = [max([len(c)] + [len(r[i]) for r in cells]) for i, c in enumerate(result.columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(result.columns, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines + result.summary) + "\n"


def _tolerance() -> float:
    raw = os.environ.get("ULB_TOL")
    if raw is None:
        return FEAS_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"ULB_TOL={raw!r} is not a number") from None
    if not tol > 0:
        raise UsageError("ULB_TOL must be positive")
    return tol


def _N(value: str) -> int:
    try:
        N = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"N must be an integer, got {value!r}") from None
    if N < 2:
        raise argparse.ArgumentTypeError("N must be >= 2")
    return N


def _n(value: str) -> int:
    try:
        n = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"n must be an integer, got {value!r}") from None
    if n < 2:
        raise argparse.ArgumentTypeError("n must be >= 2")
    return n


def _range(value: str) -> range:
    lo, sep, hi = value.partition(":")
    try:
        r = range(int(lo), int(hi) + 1) if sep else range(int(lo), int(lo) + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {value!r}") from None
    if not len(r) or r.start < 2:
        raise argparse.ArgumentTypeError(f"empty or invalid range {value!r}")
    return r


def cmd_bound(args) -> Result:
    h = parse_potential(args.potential, args.n)
    rep = ulb(args.n, args.N, h, tol=args.tol)
    rows = [[i, float(a), float(r)] for i, (a, r) in enumerate(zip(rep.rule.nodes, rep.rule.weights), start=1)]
    summary = [
        f"n={args.n} N={args.N} tau={rep.ctx.tau} k={rep.ctx.k} s={rep.ctx.s:.10g}",
        f"ULB ({h.label}) = {rep.value:.{TEXT_DIGITS}g}",
        f"certificate: {'ok' if rep.verified else 'FAILED'} (max violation {rep.feasibility.max_violation:.2e})",
    ]
    return Result(["i", "alpha", "rho"], rows, rep.to_dict(), summary, rep.verified)


def _read_reference(path) -> dict:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                out[int(row[0])] = float(row[1])
            except (ValueError, IndexError):
                if lineno == 1:
                    continue  # header
                raise CodeFormatError(f"expected 'N,energy', got {row!r}", lineno) from None
    return out


def cmd_table(args) -> Result:
    h = parse_potential(args.potential, args.n)
    ref = _read_reference(args.reference) if args.reference else {}
    rows, records, ok = [], [], True
    for N in args.N_range:
        rep = ulb(args.n, N, h, tol=args.tol)
        ok &= rep.verified
        e = ref.get(N)
        gap = None if e is None else e - rep.value
        rows.append([N, rep.ctx.tau, rep.value, e, gap])
        records.append({"N": N, "tau": rep.ctx.tau, "ulb": rep.value, "energy": e, "gap": gap, "verified": rep.verified})
    payload = {"n": args.n, "potential": h.label, "rows": records}
    return Result(["N", "tau", "ULB", "energy", "gap"], rows, payload, [], ok)


def cmd_curve(args) -> Result:
    if args.tau_max is not None:
        s_max = interval(args.n, args.tau_max).hi
    elif args.s_max is not None:
        s_max = args.s_max
    else:
        raise UsageError("give --s-max or --tau-max")
    if not -1 <= args.s_min < s_max < 1:
        raise UsageError("need -1 <= s_min < s_max < 1")
    if args.steps < 2:
        raise UsageError("--steps must be >= 2")
    grid = np.linspace(args.s_min, s_max, args.steps)
    s, taus, vals = levenshtein_curve(args.n, grid)
    rows = [[float(a), int(t), float(v)] for a, t, v in zip(s, taus, vals)]
    junctions = []
    for tau in range(1, int(taus.max()) + 1):
        hi = interval(args.n, tau).hi
        junctions.append({"tau": tau, "s": hi, "D": dgs_bound(args.n, tau + 1)})
    payload = {
        "n": args.n,
        "points": [{"s": r[0], "tau": r[1], "L": r[2]} for r in rows],
        "junctions": junctions,
    }
    return Result(["s", "tau", "L"], rows, payload)


def cmd_testfn(args) -> Result:
    rule = build_rule(args.n, args.N)
    vals = test_functions(rule, range(1, args.j_max + 1))
    tol = args.neg_tol
    rows = [[j, q, "-" if q < -tol else ("0" if abs(q) <= tol else "+")] for j, q in vals.items()]
    neg = [j for j, q in vals.items() if j > rule.tau and q < -tol]
    verdict = f"negative Q_j for j in {neg}: ULB improvable" if neg else f"Q_j >= 0 for tau < j <= {args.j_max}"
    payload = {
        "n": args.n,
        "N": args.N,
        "tau": rule.tau,
        "s": rule.s,
        "Q": {str(j): q for j, q in vals.items()},
        "negative_js": neg,
        "verdict": verdict,
    }
    summary = [f"n={args.n} N={args.N} tau={rule.tau} s={rule.s:.10g}", verdict]
    return Result(["j", "Q_j", "sign"], rows, payload, summary)


def cmd_verdict(args) -> Result:
    scan = lp_optimality_verdict(args.n, args.N, tol=args.neg_tol)
    rows = [[j, q] for j, q in scan.values.items()]
    summary = [
        f"n={args.n} N={args.N} tau={scan.ctx.tau} s={scan.ctx.s:.10g} j0={scan.j0}",
        f"negative Q_j below j0: {scan.negative_js or 'none'}",
        scan.conclusion,
    ]
    return Result(["j", "Q_j"], rows, scan.to_dict(), summary)


def cmd_energy(args) -> Result:
    code = parse_code(args.code, args.n)
    h = parse_potential(args.potential, code.n)
    if h.kind in ("log", "ft"):
        log.warning("the %s potential takes negative values; energies may be negative", h.label)
    cmp = compare_energy(code, h)
    rule = configuration_quadrature(code)
    alphas, q = rule.nodes, rule.weights
    rows = [[float(a), float(w)] for a, w in zip(alphas, q)]
    payload = cmp.to_dict()
    payload["design_strength"] = code.design_strength()
    payload["spectrum"] = [{"alpha": float(a), "q": float(w)} for a, w in zip(alphas, q)]
    summary = [
        f"code={cmp.code} n={cmp.n} N={cmp.N} design strength={payload['design_strength']}",
        f"energy ({h.label}) = {cmp.energy:.{TEXT_DIGITS}g}",
        f"ULB = {cmp.ulb:.{TEXT_DIGITS}g}  gap = {cmp.gap:.{TEXT_DIGITS}g}",
    ]
    return Result(["alpha", "q"], rows, payload, summary)


def cmd_improve(args) -> Result:
    h = parse_potential(args.potential, args.n)
    imp = improve_bound(args.n, args.N, h, args.j, eps=args.eps, tol=args.tol)
    rows = [[i, float(c)] for i, c in enumerate(imp.polynomial.gegenbauer_coeffs)]
    summary = [
        f"n={args.n} N={args.N} j={args.j} Q_j={imp.q_j:.6g} eps={imp.epsilon:.6g}",
        f"ULB = {imp.ulb:.10g}  improved = {imp.value:.10g}",
        f"certificate: {'ok' if imp.certified else 'FAILED'}",
    ]
    return Result(["i", "f_i"], rows, imp.to_dict(), summary, imp.certified)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "csv", "json"), default="text")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")

    p = _Parser(prog="ulbound", description="Universal lower bounds for the energy of spherical codes.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def nN(sp, need_N=True):
        sp.add_argument("--n", type=_n, required=True, help="ambient dimension (sphere S^{n-1})")
        if need_N:
            sp.add_argument("--N", type=_N, required=True, help="number of points")

    sp = sub.add_parser("bound", parents=[common], help="universal lower bound for one (n, N)")
    nN(sp)
    sp.add_argument("--potential", default="newton")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("table", parents=[common], help="bounds over a range of N, optionally against known energies")
    nN(sp, need_N=False)
    sp.add_argument("--N-range", type=_range, required=True, metavar="LO:HI")
    sp.add_argument("--potential", default="newton")
    sp.add_argument("--reference", help="CSV of N,energy rows")
    sp.set_defaults(func=cmd_table)

    sp = sub.add_parser("curve", parents=[common], help="Levenshtein function L(n, s) sampled on a grid")
    nN(sp, need_N=False)
    sp.add_argument("--s-min", type=float, default=-1.0)
    sp.add_argument("--s-max", type=float)
    sp.add_argument("--tau-max", type=int, help="sample up to the right end of I_tau")
    sp.add_argument("--steps", type=int, default=200)
    sp.set_defaults(func=cmd_curve)

    sp = sub.add_parser("testfn", parents=[common], help="test functions Q_j for j = 1..j_max")
    nN(sp)
    sp.add_argument("--j-max", type=int, default=20)
    sp.set_defaults(func=cmd_testfn)

    sp = sub.add_parser("verdict", parents=[common], help="j0 cutoff, sign scan and LP-optimality conclusion")
    nN(sp)
    sp.set_defaults(func=cmd_verdict)

    sp = sub.add_parser("energy", parents=[common], help="energy of a code against the bound")
    sp.add_argument("--code", required=True, help="d4, simplex, cross or file:PATH")
    sp.add_argument("--n", type=_n, help="dimension for simplex/cross")
    sp.add_argument("--potential", default="newton")
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("improve", parents=[common], help="raise the bound with a degree-j term")
    nN(sp)
    sp.add_argument("--potential", default="newton")
    sp.add_argument("--j", type=int, required=True)
    sp.add_argument("--eps", type=float)
    sp.set_defaults(func=cmd_improve)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args.tol = _tolerance()
        args.neg_tol = args.tol if "ULB_TOL" in os.environ else NEG_TOL
        result = args.func(args)
        text = render(result, args.format)
        if args.output:
            with open(args.output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except (OSError, CodeFormatError) as exc:
        print(f"ulbound: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, BoundError, PotentialError, CodeError, ValueError) as exc:
        print(f"ulbound: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QuadratureError as exc:
        print(f"ulbound: {exc}", file=sys.stderr)
        return EXIT_CERT
    if args.format == "csv" and result.summary:
        for line in result.summary:
            print(line, file=sys.stderr)
    return EXIT_OK if result.certified else EXIT_CERT


if __name__ == "__main__":
    sys.exit(main())
