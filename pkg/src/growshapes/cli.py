"""Command-line interface: gen, solve, verify, bench, stats, sortlb-check.

Exit codes: 0 success, 1 verification/check divergence, 2 usage or input
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict

from .core import compute_stats
from .harness import (
    ALGORITHMS,
    GENERATOR_KINDS,
    bench,
    generate,
    read_instance,
    run_solver,
    sortlb_check,
    verify,
    write_instance,
    write_schedule,
)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="growshapes",
                                description="Elimination order of growing shapes.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an instance file")
    g.add_argument("--kind", choices=GENERATOR_KINDS, default="uniform")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--rate-min", type=float, default=1.0)
    g.add_argument("--rate-max", type=float, default=1.0)
    g.add_argument("--shape", choices=("disk", "square", "rect", "ball", "box"),
                   default="disk")
    g.add_argument("--out", required=True)

    s = sub.add_parser("solve", help="solve an instance file")
    s.add_argument("--algo", choices=ALGORITHMS, required=True)
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--json", action="store_true", help="write the schedule as JSON")

    v = sub.add_parser("verify", help="cross-check several algorithms")
    v.add_argument("--algo", choices=ALGORITHMS, action="append", required=True,
                   help="repeat for each algorithm (at least two)")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--strict", action="store_true",
                   help="also run the exact general-position validation")

    b = sub.add_parser("bench", help="time solvers over a list of sizes")
    b.add_argument("--algo", choices=ALGORITHMS, action="append", required=True)
    b.add_argument("--n-list", required=True, help="comma-separated sizes")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--kind", choices=GENERATOR_KINDS, default="uniform")
    b.add_argument("--rate-min", type=float, default=1.0)
    b.add_argument("--rate-max", type=float, default=1.0)
    b.add_argument("--shape", choices=("disk", "square"), default="disk")
    b.add_argument("--json", action="store_true")

    st = sub.add_parser("stats", help="rate ratio, spread, alpha of an instance")
    st.add_argument("--in", dest="infile", required=True)
    st.add_argument("--exact-stats", action="store_true",
                    help="exact spread (n <= 4096)")

    sl = sub.add_parser("sortlb-check", help="sorting-reduction check")
    sl.add_argument("--n", type=int, required=True)
    sl.add_argument("--seed", type=int, default=0)
    sl.add_argument("--algo", choices=ALGORITHMS, action="append",
                    help="default: naive and cquadtree")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            inst = generate(args.kind, args.n, args.seed, args.rate_min,
                            args.rate_max, args.shape)
            write_instance(inst, args.out)
            print(f"wrote {args.kind} instance n={inst.n} to {args.out}")
            return 0

        if args.command == "solve":
            inst = read_instance(args.infile)
            t0 = time.perf_counter()
            sched = run_solver(args.algo, inst)
            dt = time.perf_counter() - t0
            write_schedule(sched, args.out, as_json=args.json)
            print(f"n={inst.n} algorithm={args.algo} seconds={dt:.3f}")
            return 0

        if args.command == "verify":
            inst = read_instance(args.infile)
            report = verify(inst, args.algo, strict=args.strict)
            for w in report.warnings:
                print(f"warning: {w}")
            if report.ok:
                print(f"agree: {', '.join(report.algorithms)}")
                return 0
            print(report.divergence.describe())
            return 1

        if args.command == "bench":
            n_list = [int(x) for x in args.n_list.split(",")]
            report = bench(n_list, args.algo, seed=args.seed, repeats=args.repeats,
                           kind=args.kind, rate_min=args.rate_min,
                           rate_max=args.rate_max, shape=args.shape)
            print(report.to_json() if args.json else report.table())
            return 0

        if args.command == "stats":
            inst = read_instance(args.infile)
            stats = compute_stats(inst, exact_phi=args.exact_stats)
            print(json.dumps(asdict(stats), indent=2))
            return 0

        if args.command == "sortlb-check":
            algos = args.algo or ["naive", "cquadtree"]
            result = sortlb_check(args.n, args.seed, algos)
            print(result.message)
            return 0 if result.ok else 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 2


if __name__ == "__main__":
    sys.exit(main())
