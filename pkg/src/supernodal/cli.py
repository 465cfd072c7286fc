"""Command-line front end.

Exit codes: 0 success, 1 analysis error or failed check, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import random
import sys
from fractions import Fraction
from pathlib import Path

from . import report as rep
from .controlled import build_system
from .errors import AnalysisError
from .fuzz import random_circuit
from .netlist import bind_values, load_netlist, serialize_netlist, validate_circuit
from .verify import back_substitute, check_solution, differential_check, mna_solve, mna_system, solve_reduced

log = logging.getLogger("supernodal")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(2)


def _binding(text: str) -> tuple[str, Fraction]:
    name, sep, value = text.partition("=")
    if not sep or not name:
        raise argparse.ArgumentTypeError(f"expected sym=rational, got {text!r}")
    try:
        return name, Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad rational in {text!r}") from None


def _parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="supernodal", description="Supernodal analysis by inspection")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="print partition, node expressions and the reduced system")
    p.add_argument("netlist")
    p.add_argument("--format", choices=("text", "latex", "json"), default="text")
    p.add_argument("--trace", action="store_true", help="include per-entry provenance")
    p.add_argument("--ref", action="append", default=None, metavar="NODE",
                   help="local reference node (repeatable); overrides .ref directives")

    p = sub.add_parser("solve", help="numeric solution, cross-checked against the MNA oracle")
    p.add_argument("netlist")
    p.add_argument("--bind", nargs="*", type=_binding, default=[], metavar="SYM=RAT")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--ref", action="append", default=None, metavar="NODE")

    p = sub.add_parser("check", help="differential check against the MNA oracle")
    p.add_argument("netlist")
    p.add_argument("--bind", nargs="*", type=_binding, default=[], metavar="SYM=RAT")

    p = sub.add_parser("fuzz", help="random differential campaign")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-nodes", type=int, default=8)
    p.add_argument("--max-elements", type=int, default=12)
    p.add_argument("--out", default="fuzz-failures", help="directory for failing netlists")
    return parser


def _analyze(args) -> int:
    c = load_netlist(args.netlist)
    rs = build_system(validate_circuit(c), args.ref)
    report = rep.build_report(rs, with_trace=args.trace)
    if args.format == "json":
        sys.stdout.write(rep.to_json(report))
    elif args.format == "latex":
        sys.stdout.write(rep.to_latex(report))
    else:
        sys.stdout.write(rep.to_text(report))
    return 0


def _solve(args) -> int:
    c = bind_values(load_netlist(args.netlist), dict(args.bind))
    rs = build_system(validate_circuit(c), args.ref)
    sol = back_substitute(rs, solve_reduced(rs))
    residuals = check_solution(c, sol)
    if not residuals.ok:
        print(f"internal error: residuals {residuals.failures()}", file=sys.stderr)
        return 1
    oracle = mna_solve(mna_system(c))
    if oracle.node_voltages != sol.node_voltages:
        print("internal error: supernodal solution disagrees with the MNA oracle", file=sys.stderr)
        return 1
    if args.format == "json":
        sys.stdout.write(rep.to_json(rep.build_report(rs, sol)))
    else:
        for n, v in sorted(sol.node_voltages.items()):
            print(f"v{n} = {rep.format_rational(v)}")
        for k, v in sorted(sol.branch_currents.items()):
            print(f"i({k}) = {rep.format_rational(v)}")
    return 0


def _check(args) -> int:
    c = load_netlist(args.netlist)
    if args.bind or c.symbols():
        c = bind_values(c, dict(args.bind))
    verdict = differential_check(c)
    print(("PASS: " if verdict else "FAIL: ") + verdict.reason)
    return 0 if verdict else 1


def _fuzz(args) -> int:
    rng = random.Random(args.seed)
    out = Path(args.out)
    failures = 0
    for i in range(args.count):
        c = random_circuit(rng, max_nodes=args.max_nodes, max_elements=args.max_elements)
        try:
            verdict = differential_check(c)
        except AnalysisError as exc:
            verdict = None
            reason = f"pipeline error: {exc}"
        else:
            reason = verdict.reason
        log.debug("circuit %d: %s", i, reason)
        if not verdict:
            failures += 1
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"fail_seed{args.seed}_{i:04d}.ckt"
            path.write_text(f"* {reason}\n" + serialize_netlist(c))
            print(f"FAIL {path}: {reason}")
    print(f"{args.count - failures}/{args.count} passed")
    return 0 if failures == 0 else 1


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handlers = {"analyze": _analyze, "solve": _solve, "check": _check, "fuzz": _fuzz}
    try:
        return handlers[args.command](args)
    except AnalysisError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


run = main

if __name__ == "__main__":
    sys.exit(main())
