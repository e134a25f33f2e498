"""``hm-lab`` command line.

Exit status: 0 pass, 1 a checked inequality failed, 2 usage error or bad
input, 3 undecided (precision exhausted or an enclosure could not be
separated).  Output is JSON (``--format json``, the default) or CSV, and is
byte-identical across runs with the same arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .contfrac import (
    check_approx_bounds,
    check_table,
    convergents,
    expand,
    explicit_selection,
    select_indices,
    table_csv,
    table_json,
    verify_best_approx,
)
from .exact import PrecisionExhausted, format_scalar, parse_rational, parse_scalar, refine
from .floorseq import (
    DifferenceScheme,
    FloorSequence,
    IntPolynomial,
    verify_condition_star,
    w_scan,
)
from .lattice import PrecisionTooLow, integer_relation
from .places import UnsupportedField
from .series import SeriesSpec, eval_series
from .witness import WindowTooSmall, run_witness

SCHEMA = "hm-lab/1"
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_UNDECIDED = 0, 1, 2, 3

WORKED_THETA = "quad:1,-1/2,2"  # 1/(2+sqrt 2) = 1 - sqrt(2)/2
WORKED_SETS = {2: [9, 16, 26, 33, 50, 57, 67], 3: [23, 40, 64], 4: [57]}


class UsageError(ValueError):
    pass


def _window(text: str) -> tuple[int, int]:
    try:
        a, b = text.split(":")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like LO:HI, got {text!r}")
    if lo < 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad window {text!r}")
    return lo, hi


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hm-lab", description="exact verifiers for sum f(floor(m theta + alpha)) beta^-m")
    ap.add_argument("--version", action="version", version=f"hm-lab {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def common(p, *, beta=False, poly=True, ns=True, window=True):
        p.add_argument("--theta", default=WORKED_THETA, help="scalar: rat:p/q, quad:a,b,d or dec:x")
        p.add_argument("--alpha", default=WORKED_THETA)
        if beta:
            p.add_argument("--beta", default="rat:2")
        if poly:
            p.add_argument("--poly", default="0,1", help="coefficients, constant first")
        if ns:
            p.add_argument("--n", type=int, help="single index n")
            p.add_argument("--n-range", type=_window, help="inclusive range A:B of n")
            p.add_argument("--shifts", choices=("convergents", "selection"), default="convergents",
                           help="r_n = q_n (convergents) or r_n = q_{l_n} from --mode (selection)")
            p.add_argument("--mode", choices=("bounded", "unbounded", "auto"), default="auto")
        if window:
            p.add_argument("--window", type=_window, default=(0, 1000))
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("cf", help="continued fraction, convergents and their checks")
    p.add_argument("--theta", required=True)
    p.add_argument("--count", type=int, default=20, help="number of partial quotients")
    p.add_argument("--mode", choices=("bounded", "unbounded", "auto"), default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("seq", help="u_m = f(floor(m theta + alpha)) over a window")
    common(p, ns=False)

    p = sub.add_parser("sparsity", help="nonzero sets of w_{n,m}")
    common(p)

    p = sub.add_parser("condition-star", help="expanding gaps, polynomial variation, case analysis")
    common(p)
    p.add_argument("--epsilon", type=_rational, default=None,
                   help="gap constant (default: the selection's window epsilon)")
    p.add_argument("--c0", type=int, default=None, help="variation exponent (default sigma-2)")

    p = sub.add_parser("witness", help="Subspace-Theorem witness chain")
    common(p, beta=True)
    p.add_argument("--epsilon", type=_rational, default=Fraction(1, 10))
    p.add_argument("--rho", type=_rational, default=None, help="override rho (negative control)")
    p.add_argument("--n0", type=int, default=None)

    p = sub.add_parser("eval", help="certified series enclosure")
    common(p, beta=True, ns=False, window=False)
    p.add_argument("--precision", type=int, default=128)

    p = sub.add_parser("relation", help="bounded integer-relation search")
    common(p, beta=True, ns=False, window=False)
    p.add_argument("--x", default=None, help="scalar to test instead of the series value")
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--height", type=int, default=10**6)
    p.add_argument("--precision", type=int, default=128)

    p = sub.add_parser("repro-example1", help="reproduce the three nonzero sets of the worked example")
    p.add_argument("--window", type=_window, default=(0, 70))
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return ap


# ---------------------------------------------------------------------------
# helpers


def _emit(obj: dict, out) -> None:
    out.write(json.dumps(dict(obj, schema=SCHEMA), sort_keys=True, indent=2, default=str))
    out.write("\n")


def _irrational_unit(text: str, name: str):
    x = parse_scalar(text)
    if isinstance(x, Fraction):
        raise ValueError(f"{name} must be irrational, got {text}")
    if not 0 < x < 1:
        raise ValueError(f"{name} must lie in (0, 1)")
    return x


def _unit(text: str, name: str):
    x = parse_scalar(text)
    if not 0 < x < 1:
        raise ValueError(f"{name} must lie in (0, 1)")
    return x


def _ns(args) -> list[int]:
    if args.n is not None and args.n_range is not None:
        raise UsageError("give --n or --n-range, not both")
    if args.n is not None:
        return [args.n]
    if args.n_range is not None:
        return list(range(args.n_range[0], args.n_range[1] + 1))
    return [2, 3, 4]


def _selection(theta, args, ns: Sequence[int]):
    top = max(ns)
    cf = expand(theta, max(top + 4, 24))
    table = convergents(cf)
    if args.shifts == "convergents":
        if min(ns) < 0:
            raise UsageError("n must be >= 0")
        return explicit_selection(cf, list(range(0, top + 1)), table, first_n=0)
    if min(ns) < 1:
        raise UsageError("selection shifts start at n = 1")
    sel = select_indices(cf, args.mode, top, table)
    return sel


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_cf(args, out) -> int:
    theta = _irrational_unit(args.theta, "theta")
    if args.count < 2:
        raise UsageError("--count must be >= 2")
    cf = expand(theta, args.count)
    table = convergents(cf)
    if args.format == "csv":
        out.write(table_csv(cf, table))
        return EXIT_PASS
    bounds = [check_approx_bounds(cf, table, n) for n in range(0, cf.N - 1)]
    Q = min(max(table.denominators()), 10**5)
    best = verify_best_approx(theta, table, Q)
    rep = {"command": "cf", "theta": format_scalar(theta), **table_json(cf, table),
           "table_ok": check_table(cf, table),
           "approx_bounds": [{"n": b.n, "lower": str(b.lower), "upper": str(b.upper), "pass": b.passed}
                             for b in bounds],
           "best_approx": {"Q": best.Q, "records": list(best.records), "pass": best.passed}}
    if args.mode:
        rep["selection"] = select_indices(cf, args.mode, max(1, (cf.N - 2) // 2), table).to_json()
    _emit(rep, out)
    statuses = [b.passed for b in bounds] + [best.passed, rep["table_ok"]]
    if any(s is False for s in statuses):
        return EXIT_FAIL
    return EXIT_UNDECIDED if any(s is None for s in statuses) else EXIT_PASS


def cmd_seq(args, out) -> int:
    theta = _irrational_unit(args.theta, "theta")
    alpha = _unit(args.alpha, "alpha")
    f = IntPolynomial.parse(args.poly)
    src = FloorSequence(f, theta, alpha)
    lo, hi = args.window
    fl = [int(v) for v in src.floors(lo, hi)]
    u = [int(v) for v in src.values(lo, hi)]
    if args.format == "csv":
        out.write(_csv(["m", "floor", "u"], ((lo + i, a, b) for i, (a, b) in enumerate(zip(fl, u)))))
    else:
        _emit({"command": "seq", "f": str(f), "theta": format_scalar(theta), "alpha": format_scalar(alpha),
               "window": list(args.window), "floors": fl, "u": u}, out)
    return EXIT_PASS


def _scan_setup(args):
    theta = _irrational_unit(args.theta, "theta")
    alpha = _unit(args.alpha, "alpha")
    f = IntPolynomial.parse(args.poly)
    ns = _ns(args)
    sel = _selection(theta, args, ns)
    return theta, alpha, f, ns, sel


def cmd_sparsity(args, out) -> int:
    theta, alpha, f, ns, sel = _scan_setup(args)
    scheme = DifferenceScheme.for_poly(f, sel)
    src = FloorSequence(f, theta, alpha)
    slices = [w_scan(scheme, src, n, args.window) for n in ns]
    if args.format == "csv":
        out.write(_csv(["n", "r", "m", "w"], ((s.n, s.r, m, w) for s in slices for m, w in s.entries)))
    else:
        _emit({"command": "sparsity", "f": str(f), "sigma": scheme.sigma, "weights": list(scheme.weights),
               "selection": sel.to_json(), "slices": [s.to_json() for s in slices]}, out)
    return EXIT_PASS


def cmd_condition_star(args, out) -> int:
    theta, alpha, f, ns, sel = _scan_setup(args)
    rep = verify_condition_star(f, theta, alpha, sel, ns, args.window, args.epsilon, args.c0)
    per_n = []
    for s in rep.slices:
        g = rep.gaps.get(s.n)
        c = rep.consistency.get(s.n)
        d = rep.dio.get(s.n)
        per_n.append({
            "n": s.n, "r": s.r, "nonzero": len(s.entries), "mu": s.mu,
            "gap": None if g is None else {"min_gap": g.min_gap, "bound": str(g.bound), "pass": g.passed},
            "case_analysis": None if c is None else {
                "orientation": c.orientation, "zero": c.zero, "boundary": list(c.boundary),
                "undecided": c.undecided, "mismatches": [list(x) for x in c.mismatches[:20]],
                "pass": c.passed},
            "diophantine": None if d is None else {
                "threshold": float(d.threshold), "bound": str(d.bound),
                "qualifying": list(d.qualifying), "pass": d.passed},
        })
    v, gr = rep.variation, rep.growth
    if args.format == "csv":
        out.write(_csv(["n", "r", "nonzero", "mu", "min_gap", "gap_bound", "gap_pass", "cases_pass", "dio_pass"],
                       ((p["n"], p["r"], p["nonzero"], p["mu"],
                         p["gap"] and p["gap"]["min_gap"], p["gap"] and p["gap"]["bound"],
                         p["gap"] and p["gap"]["pass"], p["case_analysis"] and p["case_analysis"]["pass"],
                         p["diophantine"] and p["diophantine"]["pass"]) for p in per_n)))
    else:
        _emit({
            "command": "condition-star", "f": str(f), "sigma": rep.sigma, "epsilon": str(rep.epsilon),
            "window": list(rep.window), "selection": sel.to_json(), "per_n": per_n,
            "variation": {"c0": v.c0, "c": str(v.c), "per_n": {str(n): str(c) for n, c in v.per_slice},
                          "argmax": v.argmax, "pass": v.passed},
            "boundary_growth": None if gr is None else {
                "M": gr.M, "eps1": str(gr.eps1), "eps2": str(gr.eps2), "count": gr.count, "pass": gr.passed},
            "notes": rep.notes, "pass": rep.passed,
        }, out)
    if rep.undecided:
        return EXIT_UNDECIDED
    return EXIT_PASS if rep.passed else EXIT_FAIL


def cmd_witness(args, out) -> int:
    theta, alpha, f, ns, sel = _scan_setup(args)
    beta = parse_scalar(args.beta)
    if args.epsilon <= 0:
        raise UsageError("--epsilon must be positive")
    rep = run_witness(f, theta, alpha, beta, sel, ns, args.window, args.epsilon, args.rho, args.n0)
    if args.format == "csv":
        out.write(rep.to_csv())
    else:
        _emit(dict(rep.to_json(), command="witness", f=str(f), selection=sel.to_json()), out)
    if not rep.passed and not rep.undecided:
        return EXIT_FAIL
    return EXIT_UNDECIDED if rep.undecided else EXIT_PASS


def _series_spec(args) -> SeriesSpec:
    theta = _irrational_unit(args.theta, "theta")
    alpha = _unit(args.alpha, "alpha")
    return SeriesSpec(IntPolynomial.parse(args.poly), theta, alpha, parse_scalar(args.beta))


def cmd_eval(args, out) -> int:
    if args.precision < 8:
        raise UsageError("--precision must be >= 8")
    val = eval_series(_series_spec(args), args.precision)
    if args.format == "csv":
        j = val.to_json()
        out.write(_csv(["precision", "lo", "hi", "tail_M"],
                       [(j["precision"], j["enclosure"]["lo"], j["enclosure"]["hi"], j["tail_M"])]))
    else:
        _emit(dict(val.to_json(), command="eval"), out)
    return EXIT_PASS


def cmd_relation(args, out) -> int:
    p = args.precision
    if args.x is not None:
        x = parse_scalar(args.x)
        enc, subject = refine(x, p + 2).dyadic(p + 2), format_scalar(x)
    else:
        spec = _series_spec(args)
        enc, subject = eval_series(spec, p).enclosure, spec.to_json()
    rep = integer_relation(enc, args.degree, args.height, p)
    if args.format == "csv":
        out.write(_csv(["outcome", "D", "H", "p", "coefficients"],
                       [(rep.outcome, args.degree, args.height, p,
                         " ".join(map(str, rep.coefficients or ())))]))
    else:
        _emit(dict(rep.to_json(), command="relation", subject=subject), out)
    return EXIT_PASS


def cmd_repro(args, out) -> int:
    theta = parse_scalar(WORKED_THETA)
    f = IntPolynomial((0, 1))
    cf = expand(theta, 24)
    sel = explicit_selection(cf, list(range(0, 5)), convergents(cf), first_n=0)
    scheme = DifferenceScheme.for_poly(f, sel)
    src = FloorSequence(f, theta, theta)
    slices = {n: w_scan(scheme, src, n, args.window) for n in (2, 3, 4)}
    got = {n: s.positions for n, s in slices.items()}
    match = args.window != (0, 70) or got == WORKED_SETS
    if args.format == "csv":
        out.write(_csv(["n", "r", "m", "w"], ((s.n, s.r, m, w) for s in slices.values() for m, w in s.entries)))
    else:
        _emit({"command": "repro-example1", "theta": WORKED_THETA, "alpha": WORKED_THETA, "f": "0,1",
               "weights": list(scheme.weights), "shifts": list(sel.shifts), "window": list(args.window),
               "nonzero_sets": {str(n): v for n, v in got.items()},
               "values": {str(n): [w for _, w in s.entries] for n, s in slices.items()},
               "expected": {str(n): v for n, v in WORKED_SETS.items()} if args.window == (0, 70) else None,
               "match": match}, out)
    return EXIT_PASS if match else EXIT_FAIL


COMMANDS = {
    "cf": cmd_cf, "seq": cmd_seq, "sparsity": cmd_sparsity, "condition-star": cmd_condition_star,
    "witness": cmd_witness, "eval": cmd_eval, "relation": cmd_relation, "repro-example1": cmd_repro,
}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = _build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (PrecisionExhausted, PrecisionTooLow) as exc:
        print(f"hm-lab: undecided: {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (UsageError, WindowTooSmall, UnsupportedField, ValueError, TypeError, IndexError) as exc:
        print(f"hm-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
