"""``compcentrality`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 I/O or input-data error,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

from .condensation import InvariantError
from .driver import DegenerateGraphError
from .generators import GENERATORS
from .graph import GraphFormatError, write_edge_list
from .harness import ALGORITHMS, RunConfig, cmd_compare, cmd_compute, cmd_sweep

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INVARIANT = 0, 1, 2, 3

log = logging.getLogger("compcentrality")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for I/O errors here
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _tols(text: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance list {text!r}") from None
    return vals


def _solver_args(p):
    p.add_argument("--input", type=Path, required=True, help="edge-list file")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--max-iter", type=int, default=10000)
    p.add_argument("--no-rowsum-skip", action="store_true")
    p.add_argument("--no-half-discard", action="store_true")
    p.add_argument("--no-batch-singles", action="store_true")
    p.add_argument("--parallel-levels", action="store_true")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="compcentrality",
                     description="Componentwise eigenvector centrality on directed graphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="write rank.csv (and report.csv)")
    _solver_args(p)
    p.add_argument("--algo", choices=ALGORITHMS, default="componentwise")

    p = sub.add_parser("compare", help="componentwise vs baseline iterations")
    _solver_args(p)

    p = sub.add_parser("sweep", help="solve time and iterations over tolerances")
    _solver_args(p)
    p.add_argument("--tols", type=_tols, default=[1e-3, 1e-5, 1e-7, 1e-9])
    p.add_argument("--algo", action="append", choices=ALGORITHMS,
                   help="algorithm to sweep (repeatable; default baseline and componentwise)")
    p.add_argument("--repeat", type=int, default=3, help="keep the fastest of N runs")

    p = sub.add_parser("generate", help="write a synthetic edge list")
    p.add_argument("kind", choices=sorted(GENERATORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--output", type=Path, help="file name (default <kind>-<seed>.txt in --out-dir)")
    p.add_argument("--components", type=int, default=10, help="dag-of-sccs")
    p.add_argument("--size", type=int, default=5, help="dag-of-sccs: max component size")
    p.add_argument("--min-size", type=int, help="dag-of-sccs: min component size")
    p.add_argument("--n", type=int, default=10000, help="giant-component: vertex count")
    p.add_argument("--giant-fraction", type=float, default=0.5, help="giant-component")
    p.add_argument("--blocks", type=int, default=2, help="isolated-blocks")
    p.add_argument("--block-size", type=int, default=6, help="isolated-blocks")
    return parser


def _config(args, algorithm="componentwise", repeat=1) -> RunConfig:
    return RunConfig(input=args.input, algorithm=algorithm, tol=args.tol,
                     max_iter=args.max_iter, rowsum_skip=not args.no_rowsum_skip,
                     half_discard=not args.no_half_discard,
                     batch_singles=not args.no_batch_singles,
                     parallel_levels=args.parallel_levels, out_dir=args.out_dir,
                     seed=args.seed, repeat=repeat)


def _generate(args) -> Path:
    if args.kind == "dag-of-sccs":
        g = GENERATORS[args.kind](args.components, args.size, args.seed, min_size=args.min_size)
        params = f"components={args.components} size={args.size}"
    elif args.kind == "giant-component":
        g = GENERATORS[args.kind](args.n, args.giant_fraction, args.seed)
        params = f"n={args.n} giant_fraction={args.giant_fraction}"
    else:
        g = GENERATORS[args.kind](args.blocks, args.block_size, args.seed)
        params = f"blocks={args.blocks} block_size={args.block_size}"
    args.out_dir.mkdir(parents=True, exist_ok=True)
    dest = args.out_dir / (args.output or f"{args.kind}-{args.seed}.txt")
    write_edge_list(g, dest, header=[f"{args.kind} {params} seed={args.seed}",
                                     f"vertices={g.n} edges={g.m}"])
    return dest


def _run(args) -> None:
    if args.command == "compute":
        res = cmd_compute(_config(args, args.algo))
        print(f"{res.algorithm}: {res.iterations} iterations, "
              f"solve {res.solve_seconds:.4f}s, converged={res.converged}")
    elif args.command == "compare":
        summary = cmd_compare(_config(args))
        for k, v in summary.items():
            print(f"{k}: {v}")
    elif args.command == "sweep":
        algos = tuple(args.algo) if args.algo else ("baseline", "componentwise")
        res = cmd_sweep(_config(args, repeat=args.repeat), args.tols, algos)
        for r in res.rows:
            print(f"tol={r['tol']:g} {r['algorithm']}: solve {r['solve_seconds']:.4f}s "
                  f"iterations {r['total_iterations']}")
    else:
        print(_generate(args))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            _run(args)
        for w in caught:
            log.warning("%s", w.message)
    except InvariantError as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (OSError, GraphFormatError, DegenerateGraphError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
