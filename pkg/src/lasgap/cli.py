"""Command-line entry point.

Exit codes: 0 pass / FEASIBLE, 1 fail / INFEASIBLE, 2 INCONCLUSIVE,
3 usage or parameter error.  A JSON report is written on exits 0-2.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import isqrt
from pathlib import Path

from . import polyopt, tardy, zeta
from .moments import oracle_compare, random_constraint
from .psd import FEASIBLE, INFEASIBLE
from .subsets import (
    CapacityError,
    DomainError,
    enumerate_subsets,
    fmt,
    format_rational,
    from_labels,
    parse_rational,
    random_pseudo_distribution,
)

EXIT_PASS, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    mode: str = "auto"
    p_ladder: tuple[int, ...] = tardy.DEFAULT_P_LADDER
    eps_ladder: tuple[str, ...] = tuple(format_rational(e) for e in polyopt.DEFAULT_EPS_LADDER)
    out: str = ""
    seed: int = 0


def _rational(text: str) -> Fraction:
    try:
        return parse_rational(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _integer(text: str) -> int:
    x = _rational(text)
    if x.denominator != 1:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer")
    return int(x)


def _int_list(text: str) -> tuple[int, ...]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "e" in part.lower() and "/" not in part:
            # allow 1e6 style ladder rungs, kept exact
            base, _, exp = part.lower().partition("e")
            out.append(_integer(base) * 10 ** _integer(exp))
        else:
            out.append(_integer(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return tuple(out)


def _rational_list(text: str) -> tuple[Fraction, ...]:
    out = tuple(_rational(part) for part in text.split(",") if part.strip())
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def _label_set(text: str) -> int:
    if not text.strip():
        return 0
    try:
        return from_labels(int(x) for x in text.split(","))
    except (ValueError, DomainError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lasgap", description="Lasserre-hierarchy gap certificates, verified exactly.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, mode=True):
        p.add_argument("--out", help="report path (default: <command>.json)")
        p.add_argument("--seed", type=_integer, default=0)
        if mode:
            p.add_argument("--mode", choices=("auto", "exact", "float"), default="auto")

    p = sub.add_parser("verify-zeta", help="check shifted-zeta inverse identities")
    p.add_argument("--n", type=_integer, required=True)
    p.add_argument("--d", type=_integer, required=True)
    p.add_argument("--all-shifts", action="store_true")
    p.add_argument("--shift", type=_label_set, default=0, help="comma-separated 1-based labels")
    p.add_argument("--dump-csv", metavar="DIR", help="write Z, A and the inverse for --shift as CSV")
    common(p, mode=False)

    p = sub.add_parser("gen-instance", help="write a gap instance")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--m", type=_integer)
    group.add_argument("--n", type=_integer)
    p.add_argument("--p-base", type=_integer, default=2)
    common(p, mode=False)

    for name, helptext in (("tardy-verify", "verify a tardy-jobs certificate"),
                           ("min-p-search", "walk the whole P ladder")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--n", type=_integer, required=True)
        p.add_argument("--k", type=_integer, required=True)
        p.add_argument("--theorem", type=_integer, choices=(1, 2), required=True)
        p.add_argument("--level", type=_integer)
        p.add_argument("--p-ladder", type=_int_list, default=tardy.DEFAULT_P_LADDER)
        p.add_argument("--weyl", action="store_true", help="add diagonalization bounds to the report")
        common(p)

    p = sub.add_parser("tardy-opt", help="integral optimum by Moore-Hodgson")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--m", type=_integer)
    group.add_argument("--n", type=_integer)
    p.add_argument("--p-base", type=_integer, default=2)
    common(p, mode=False)

    p = sub.add_parser("polyopt-verify", help="degree-k polynomial gap at level k-1")
    p.add_argument("--n", type=_integer, required=True)
    p.add_argument("--k", type=_integer, required=True)
    p.add_argument("--eps-ladder", type=_rational_list, default=polyopt.DEFAULT_EPS_LADDER)
    common(p, mode=False)

    p = sub.add_parser("oracle-compare", help="moment form vs zeta-sum form on random inputs")
    p.add_argument("--n", type=_integer, default=8)
    p.add_argument("--t", "--level", dest="t", type=_integer, default=1)
    p.add_argument("--count", type=_integer, default=20)
    common(p, mode=False)
    return parser


def _m_from(args) -> int:
    if getattr(args, "m", None) is not None:
        return args.m
    m = isqrt(args.n)
    if m * m != args.n:
        raise tardy.ParameterError(f"n = {args.n} is not a perfect square")
    return m


def _status_code(status: str) -> int:
    if status in (FEASIBLE, "PASS"):
        return EXIT_PASS
    if status in (INFEASIBLE, "FAIL"):
        return EXIT_FAIL
    return EXIT_INCONCLUSIVE


def cmd_verify_zeta(args) -> tuple[dict, str, list[str]]:
    n, d = args.n, args.d
    if not 0 <= d <= n:
        raise tardy.ParameterError("need 0 <= d <= n")
    if n > 10:
        raise CapacityError("verify-zeta is limited to n <= 10")
    shifts = range(1 << n) if args.all_shifts else [args.shift]
    failures = []
    checked = 0
    for s in shifts:
        res = zeta.check_shift(n, d, s)
        checked += 1
        if not all(res.values()):
            failures.append({"shift": fmt(s), **res})
    if args.dump_csv:
        out = Path(args.dump_csv)
        out.mkdir(parents=True, exist_ok=True)
        zeta.dump_csv(zeta.build_shifted_zeta(n, d, args.shift), out / "zeta.csv")
        zeta.dump_csv(zeta.build_companion(n, d, args.shift), out / "companion.csv")
        zeta.dump_csv(zeta.invert_shifted_zeta(n, d, args.shift), out / "inverse.csv",
                      labels=enumerate_subsets(n, d))
    status = "PASS" if not failures else "FAIL"
    report = {"n": n, "d": d, "shifts_checked": checked, "dim": len(enumerate_subsets(n, d)),
              "failures": failures, "status": status}
    lines = [f"verify-zeta n={n} d={d}: {checked} shift(s), {len(failures)} failure(s) -> {status}"]
    return report, status, lines


def cmd_gen_instance(args):
    inst = tardy.build_instance(_m_from(args), args.p_base)
    info = inst.describe()
    lines = [f"gap instance m={inst.m} P={inst.P} n={inst.n}",
             f"  deadlines: {info['deadlines']}", f"  demands:   {info['demands']}"]
    return inst.to_json(), "PASS", lines


def cmd_tardy(args, stop_on_pass: bool):
    rep = tardy.verify_gap(args.n, args.k, args.theorem, level=args.level, p_ladder=args.p_ladder,
                           mode=args.mode, stop_on_pass=stop_on_pass, weyl=args.weyl)
    status = rep.status
    lines = [f"{args.command} n={args.n} k={args.k} theorem={args.theorem} level={rep.level}: {status}"]
    for rung in rep.rungs:
        lines.append(f"  P={rung['P']}: {rung['overall']} {rung['statuses']}")
    lines.append(f"  integral optimum {rep.integral_optimum}, T = {format_rational(rep.certificate.T)}; "
                 f"{rep.statement()}")
    if rep.passing_P is not None:
        lines.append(f"  smallest passing P on the ladder: {rep.passing_P}")
    return rep.to_json(), status, lines


def cmd_tardy_opt(args):
    inst = tardy.build_instance(_m_from(args), args.p_base)
    count, tardy_set = tardy.moore_hodgson(inst.jobs())
    report = {"instance": inst.to_json(), "moore_hodgson": count,
              "tardy_jobs": [v + 1 for v in tardy_set], "expected": inst.m}
    ok = count == inst.m
    if inst.n <= 12:
        brute = tardy.brute_force_min_tardy(inst.jobs())
        report["brute_force"] = brute
        ok = ok and brute == count
    status = "PASS" if ok else "FAIL"
    report["status"] = status
    lines = [f"tardy-opt m={inst.m} P={inst.P}: Moore-Hodgson {count} tardy (expected {inst.m}) -> {status}"]
    return report, status, lines


def cmd_polyopt(args):
    rep = polyopt.verify_polyopt(args.n, args.k, args.eps_ladder)
    lines = [f"polyopt-verify n={args.n} k={args.k} level={rep.level}: {rep.status}",
             f"  integral optimum {format_rational(rep.integral_optimum)}"]
    if rep.eps is not None:
        lines.append(f"  eps = {format_rational(rep.eps)}, pseudo-value {format_rational(rep.pseudo_value)} "
                     f"(margin {format_rational(rep.margin)})")
    return rep.to_json(), rep.status, lines


def cmd_oracle_compare(args):
    if args.n > 12:
        raise CapacityError("oracle comparison enumerates supports; use n <= 12")
    rng = random.Random(args.seed)
    cases = []
    for k in range(args.count):
        p = random_pseudo_distribution(args.n, rng)
        c = random_constraint(args.n, rng)
        res = oracle_compare(p, c, args.t)
        cases.append({"case": k, **res})
    failed = [c for c in cases if not (c["variables"] and c["constraint"] and c["pushforward"])]
    status = "PASS" if not failed else "FAIL"
    report = {"n": args.n, "t": args.t, "count": args.count, "failures": failed, "status": status}
    lines = [f"oracle-compare n={args.n} t={args.t}: {args.count} cases, {len(failed)} mismatch(es) -> {status}"]
    return report, status, lines


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = RunConfig(command=args.command, mode=getattr(args, "mode", "auto"),
                       p_ladder=tuple(getattr(args, "p_ladder", tardy.DEFAULT_P_LADDER)),
                       eps_ladder=tuple(format_rational(e) for e in getattr(args, "eps_ladder",
                                                                            polyopt.DEFAULT_EPS_LADDER)),
                       out=args.out or f"{args.command}.json", seed=args.seed)
    handlers = {
        "verify-zeta": cmd_verify_zeta,
        "gen-instance": cmd_gen_instance,
        "tardy-verify": lambda a: cmd_tardy(a, stop_on_pass=True),
        "min-p-search": lambda a: cmd_tardy(a, stop_on_pass=False),
        "tardy-opt": cmd_tardy_opt,
        "polyopt-verify": cmd_polyopt,
        "oracle-compare": cmd_oracle_compare,
    }
    try:
        report, status, lines = handlers[args.command](args)
    except (tardy.ParameterError, DomainError, CapacityError, UsageError) as exc:
        print(f"lasgap {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.command != "gen-instance":
        report = {"config": asdict(config), **report}
    Path(config.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for line in lines:
        print(line)
    print(f"report written to {config.out}")
    return _status_code(status)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
