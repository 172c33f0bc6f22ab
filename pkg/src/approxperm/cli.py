"""Command-line interface.

Exit status: 0 on success, 1 when a verification fails, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import costs
from .aep import DomainError, IncompatibleError, Leak, ResourceError, deviation
from .circuits import simulate_addition_sequence_batch
from .quantum import InputDistribution, verify_deviation_theorem
from .representations import (
    LayoutParams,
    coset_aep,
    make_modular_runway_aep,
    make_multi_runway_aep,
    runway_aep,
)


class UsageError(Exception):
    pass


def _int_list(text: str) -> list:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _need(args, *names):
    missing = [f"--{n}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"--rep {args.rep} requires {', '.join(missing)}")


def _build_rep(args):
    if args.rep == "coset":
        _need(args, "N", "m")
        return coset_aep(args.N, args.m, args.k)
    if args.rep == "runway":
        _need(args, "n", "p", "m")
        return runway_aep(args.n, args.p, args.m, args.k)
    _need(args, "m")
    if args.N is not None:
        return make_modular_runway_aep(args.N, args.m, args.positions, args.k)
    _need(args, "n")
    return make_multi_runway_aep(LayoutParams(args.n, args.positions, args.m), args.k)


def _rep_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rep", required=True, choices=("coset", "runway", "nested"))
    p.add_argument("--N", type=int, help="modulus (coset, or nested modular)")
    p.add_argument("--n", type=int, help="register bits (runway, or nested plain)")
    p.add_argument("--p", type=int, help="runway position")
    p.add_argument("--m", type=int, help="padding / runway length")
    p.add_argument("--k", type=int, default=0, help="offset to add")
    p.add_argument("--positions", type=_int_list, default=[],
                   help="comma-separated runway positions for --rep nested")


def cmd_deviation(args) -> int:
    aep = _build_rep(args)
    report = deviation(aep)
    print(f"representation {aep.label}")
    print(f"deviation {report.deviation}")
    print(f"bound {report.bound}")
    worst = int(np.argmax(report.per_input_deviated))
    print(f"worst_input {worst} ({int(report.per_input_deviated[worst])} of {aep.c_size} cosets)")
    ok = report.within_bound
    print(f"pass {ok}")
    return 0 if ok else 1


def _distribution(text: str, size: int) -> InputDistribution:
    kind, _, arg = text.partition(":")
    if kind == "uniform" and not arg:
        return InputDistribution.uniform(size)
    if kind == "basis" and arg.isdigit():
        return InputDistribution.basis(size, int(arg))
    if kind == "seed" and arg.isdigit():
        return InputDistribution.random(size, int(arg))
    raise UsageError(f"--dist must be uniform, basis:G or seed:S, got {text!r}")


def cmd_verify_quantum(args) -> int:
    aep = _build_rep(args)
    report = verify_deviation_theorem(aep, _distribution(args.dist, aep.g_size))
    print(f"representation {aep.label}")
    print(f"deviation {report.deviation}")
    print(f"fidelity {report.fidelity:.12g}")
    print(f"T {report.trace_distance:.12g}")
    print(f"bound {report.bound:.12g}")
    if report.seed is not None:
        print(f"seed {report.seed}")
    ok = report.passed and report.fidelity_floor_ok
    print(f"pass {ok}")
    return 0 if ok else 1


def _parse_layout(text: str) -> LayoutParams:
    """``N:P1,P2,...:M`` (positions may be empty, as in ``6::2``)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--layout must look like n:p1,p2:m, got {text!r}")
    try:
        return LayoutParams(int(parts[0]), _int_list(parts[1]), int(parts[2]))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad --layout {text!r}: {exc}")


def cmd_simulate(args) -> int:
    if args.layout is not None:
        layout = _parse_layout(args.layout)
    elif args.n is None or args.m is None:
        raise UsageError("simulate needs --layout or both --n and --m")
    else:
        layout = LayoutParams(args.n, args.positions, args.m)
    n_cosets = 1 << (layout.m * layout.r)
    if args.c == "all":
        cosets = np.arange(n_cosets)
    else:
        if not args.c.isdigit() or int(args.c) >= n_cosets:
            raise UsageError(f"--c must be 'all' or an integer below {n_cosets}")
        cosets = np.array([int(args.c)])
    if not 0 <= args.g < 1 << layout.n:
        raise UsageError(f"--g must lie in [0, 2^{layout.n})")
    expected = (args.g + sum(args.adds)) % (1 << layout.n)
    g_out, _, leak = simulate_addition_sequence_batch(
        layout, args.adds, np.full(len(cosets), args.g), cosets)
    wrong = (leak >= 0) | (g_out != expected)
    print(f"oracle {expected}")
    if len(cosets) == 1:
        print(f"decoded {g_out[0] if leak[0] < 0 else Leak(int(leak[0]))}")
        ok = not wrong[0]
    else:
        frac = Fraction(int(wrong.sum()), len(cosets))
        bound = Fraction(len(args.adds) * layout.r, 1 << layout.m)
        print(f"wrong_fraction {frac}")
        print(f"bound {bound}")
        ok = frac <= bound
    print(f"pass {ok}")
    return 0 if ok else 1


def _cost_params(args) -> costs.CostParams:
    return costs.CostParams(
        reaction_time_us=args.reaction_time_us,
        code_distance=args.code_distance,
        trace_distance_budget=args.budget,
    )


def cmd_estimate(args) -> int:
    name = args.kind if args.spacing is None else f"{args.kind}:{args.spacing}"
    kind = costs.AdderKind.parse(name)
    report = costs.estimate(args.n, kind, _cost_params(args), modular=args.modular,
                            m=args.m, k=args.k)
    row = costs.csv_row(report)
    width = max(map(len, row))
    for field, value in row.items():
        print(f"{field:<{width}}  {value}")
    return 0


def cmd_sweep(args) -> int:
    if args.n_min < 1 or args.n_max < args.n_min:
        raise UsageError("need 1 <= --n-min <= --n-max")
    n_values = []
    n = 1 << (args.n_min - 1).bit_length()
    while n <= args.n_max:
        n_values.append(n)
        n *= 2
    if not n_values:
        raise UsageError("no power of two between --n-min and --n-max")
    kinds = [costs.AdderKind.parse(x) for x in args.kinds.split(",")]
    rows = costs.sweep(n_values, kinds, _cost_params(args), modular=args.modular)
    if args.out == "-":
        costs.write_csv(rows, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            costs.write_csv(rows, fh)
        print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cost_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--modular", action="store_true")
    p.add_argument("--budget", type=float, default=0.01, help="trace distance budget")
    p.add_argument("--reaction-time-us", type=float, default=10.0)
    p.add_argument("--code-distance", type=int, default=31)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="approxperm",
        description="Verify and cost approximate encoded additions.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("deviation", help="exact deviation of a representation")
    _rep_options(p)
    p.set_defaults(func=cmd_deviation)

    p = sub.add_parser("verify-quantum", help="check T <= 2 sqrt(deviation)")
    _rep_options(p)
    p.add_argument("--dist", default="uniform", help="uniform | basis:G | seed:S")
    p.set_defaults(func=cmd_verify_quantum)

    p = sub.add_parser("simulate", help="run piecewise adder circuits on a runway layout")
    p.add_argument("--layout", help="n:p1,p2,...:m, e.g. 8:3,6:1")
    p.add_argument("--n", type=int)
    p.add_argument("--positions", type=_int_list, default=[])
    p.add_argument("--m", type=int)
    p.add_argument("--adds", type=_int_list, required=True)
    p.add_argument("--g", type=int, default=0)
    p.add_argument("--c", default="0", help="packed coset index, or 'all'")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="cost report for one adder configuration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--kind", required=True, help="ripple | temp-and | lookahead | runway")
    p.add_argument("--spacing", type=int)
    p.add_argument("--m", type=int, help="runway length (default: sized to --budget)")
    p.add_argument("--k", type=int, help="number of additions (default: n^2)")
    _cost_options(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("sweep", help="CSV of cost reports over power-of-two sizes")
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--kinds", default="ripple,temp-and,lookahead,runway:256,runway:512")
    p.add_argument("--out", default="-")
    _cost_options(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, IncompatibleError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except ResourceError as exc:
        print(f"{parser.prog}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
