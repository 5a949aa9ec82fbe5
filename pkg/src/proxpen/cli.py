"""``proxpen`` command line: gen, solve, check, bench.

Exit codes: 0 success, 2 tolerance not reached, 3 invalid input,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench
from .acg import CsvTrace
from .errors import CalibrationError, ConvergenceError, DivergenceError, DomainError, NumericalError
from .instances import gen_linconstr_qp, gen_simplex_qp
from .io import load_instance, save_instance

EXIT_OK = 0
EXIT_TOLERANCE = 2
EXIT_INVALID = 3
EXIT_NUMERICAL = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _pairs(text):
    try:
        out = []
        for item in text.split(","):
            M, m = item.split(":")
            out.append((float(M), float(m)))
        return out
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected M:m[,M:m...], got {text!r}")


def _csv_list(conv):
    def parse(text):
        try:
            return [conv(x) for x in text.split(",") if x]
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list {text!r}")
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="proxpen", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a simplex QP instance file")
    g.add_argument("--l", type=int, default=10, help="rows of the quadratic factors")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--M", type=float, required=True, help="target upper curvature")
    g.add_argument("--m", type=float, required=True, help="target lower curvature")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--l-eq", type=int, default=None,
                   help="add this many equality constraints (for qp-aipp)")
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="run a solver; prints the run record as JSON")
    s.add_argument("instance")
    s.add_argument("--method", choices=bench.METHODS, default="aipp")
    s.add_argument("--rho-bar", type=float, default=1e-7,
                   help="relative stationarity tolerance (aipp, pg)")
    s.add_argument("--sigma", type=float, default=0.3)
    s.add_argument("--lam", type=float, default=None,
                   help="prox stepsize; defaults 0.9/m (aipp), 0.99/M (pg)")
    s.add_argument("--rho-hat", type=float, default=1e-3, help="qp-aipp stationarity tolerance")
    s.add_argument("--eta-hat", type=float, default=1e-3, help="qp-aipp feasibility tolerance")
    s.add_argument("--acg-mode", choices=("practical", "at-least"), default="practical")
    s.add_argument("--out", default=None, help="write record and solution vectors here")
    s.add_argument("--trace", default=None, help="per-iteration CSV trace (aipp, pg)")

    c = sub.add_parser("check", help="verify a solution file against its instance")
    c.add_argument("solution")
    c.add_argument("instance")
    c.add_argument("--json", action="store_true", help="print the report as JSON")

    b = sub.add_parser("bench", help="median iteration counts over a (M, m) grid")
    b.add_argument("--grid", type=_pairs, required=True, help="M:m[,M:m...]")
    b.add_argument("--methods", type=_csv_list(str), default=["pg", "aipp"])
    b.add_argument("--seeds", type=_csv_list(int), default=[1, 2, 3])
    b.add_argument("--n", type=int, default=50)
    b.add_argument("--l", type=int, default=10)
    b.add_argument("--rho-bar", type=float, default=1e-5)
    b.add_argument("--sigma", type=float, default=0.3)
    b.add_argument("--out", default=None, help="CSV path (default stdout)")
    return p


def cmd_gen(args):
    if not (args.M >= args.m > 0):
        raise UsageError(f"need M >= m > 0, got M={args.M:g}, m={args.m:g}")
    if args.l < 1 or args.n < 2:
        raise UsageError("need l >= 1 and n >= 2")
    if args.l_eq is None:
        inst = gen_simplex_qp(args.l, args.n, args.M, args.m, args.seed)
    else:
        if args.l_eq < 1:
            raise UsageError("--l-eq must be positive")
        inst = gen_linconstr_qp(args.l, args.n, args.l_eq, args.M, args.m, args.seed)
    save_instance(args.out, inst)
    return EXIT_OK


def cmd_solve(args):
    inst = load_instance(args.instance)
    if args.trace is not None and args.method == "qp-aipp":
        raise UsageError("--trace is available for aipp and pg only")
    fh = open(args.trace, "w", newline="") if args.trace else None
    try:
        record, sol = bench.solve(
            inst, args.method, rho_bar=args.rho_bar, sigma=args.sigma, lam=args.lam,
            rho_hat=args.rho_hat, eta_hat=args.eta_hat, acg_mode=args.acg_mode,
            path=args.instance, trace=CsvTrace(fh) if fh else None)
    finally:
        if fh:
            fh.close()
    json.dump(record, sys.stdout, indent=2)
    sys.stdout.write("\n")
    if args.out:
        with open(args.out, "w") as out:
            json.dump({"record": record, "solution": sol}, out)
    return EXIT_OK if record["status"] == "SUCCESS" else EXIT_TOLERANCE


def cmd_check(args):
    with open(args.solution) as fh:
        data = json.load(fh)
    try:
        record, sol = data["record"], data["solution"]
    except (KeyError, TypeError):
        raise UsageError(f"{args.solution}: not a solution file")
    inst = load_instance(args.instance)
    report = bench.check(inst, record, sol)
    if args.json:
        json.dump(report, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        for name, c in report.items():
            if name == "pass":
                continue
            tag = "PASS" if c["pass"] else "FAIL"
            print(f"{tag} {name}: {c['value']:.3e} (limit {c['limit']:.3e})")
    return EXIT_OK if report["pass"] else EXIT_TOLERANCE


def cmd_bench(args):
    bad = [m for m in args.methods if m not in ("aipp", "pg")]
    if bad or not args.methods:
        raise UsageError(f"bench methods must be among aipp, pg; got {args.methods}")
    for M, m in args.grid:
        if not M >= m > 0:
            raise UsageError(f"grid pair {M:g}:{m:g} needs M >= m > 0")
    rows = bench.bench_rows(args.grid, args.methods, args.seeds, l=args.l, n=args.n,
                            rho_bar=args.rho_bar, sigma=args.sigma)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            bench.write_bench_csv(rows, fh, args.methods)
    else:
        bench.write_bench_csv(rows, sys.stdout, args.methods)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "check": cmd_check, "bench": cmd_bench}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as e:
        print(f"proxpen: {e}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (NumericalError, DivergenceError) as e:
        print(f"proxpen: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, DomainError, CalibrationError, ValueError, OSError,
            json.JSONDecodeError) as e:
        print(f"proxpen: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
