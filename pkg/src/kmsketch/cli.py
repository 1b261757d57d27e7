"""Command-line entry point.

Subcommands:

- reduce:        reduce a csv/tsv matrix with one of the reducers
- kmeans:        restarted Lloyd k-means on a csv/tsv matrix
- eval:          seeded experiment against the optimal-clustering oracle
- bench-mailman: operation counts and timings for mailman multiplication

Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
When ``--seed`` is absent the seed comes from ``$KMSKETCH_SEED`` (default 0).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from ._validation import NumericalError
from .data import DataFormatError, load_matrix, write_matrix
from .experiment import (
    ExperimentConfig,
    bench_mailman,
    canonical_method,
    load_config,
    run_experiment,
)
from .kmeans import gamma_approx_kmeans
from .reducers import reduce
from .rng import RngStream

logger = logging.getLogger(__name__)

SEED_ENV = "KMSKETCH_SEED"
EXIT_USAGE = 1
EXIT_NUMERICAL = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"${SEED_ENV} must be an integer, got {raw!r}") from None


def _emit(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def cmd_reduce(args) -> int:
    A = load_matrix(args.input, args.format)
    method = canonical_method(args.method)
    sketch = reduce(
        A, method, args.k, args.eps, rng=RngStream(_seed(args)), r=args.r, c1=args.c1,
        c2=args.c2, variant=args.variant, use_mailman=args.mailman,
    )
    fmt = args.format or "csv"
    if args.output is None:
        sys.stdout.write(write_matrix(sketch.a_tilde, format=fmt))
        return 0
    write_matrix(sketch.a_tilde, args.output, format=fmt)
    summary = {"method": sketch.method, "r": sketch.r, "params": sketch.params,
               "shape": list(sketch.a_tilde.shape)}
    if sketch.is_selection:
        idx, scale = sketch.selected()
        summary["selected_features"] = idx.tolist()
        summary["scales"] = scale.tolist()
    sys.stdout.write(_dumps(summary))
    return 0


def cmd_kmeans(args) -> int:
    A = load_matrix(args.input, args.format)
    sol = gamma_approx_kmeans(A, args.k, restarts=args.restarts, rng=RngStream(_seed(args)),
                              max_iter=args.max_iter, tol=args.tol)
    out = {
        "k": args.k,
        "cost": sol.cost,
        "iterations": sol.iterations,
        "labels": sol.labels.tolist(),
        "sizes": sol.indicator.sizes.tolist(),
        "centroids": sol.centroids.tolist(),
    }
    _emit(_dumps(out), args.output)
    return 0


_OVERRIDES = ("method", "k", "eps", "r", "c1", "c2", "variant", "restarts", "trials",
              "oracle", "input", "format")


def cmd_eval(args) -> int:
    mapping = load_config(args.config) if args.config else {}
    for key in _OVERRIDES:
        value = getattr(args, key, None)
        if value is not None:
            mapping[key] = value
    if args.mailman:
        mapping["use_mailman"] = True
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects key=value, got {item!r}")
        mapping[key.strip()] = value
    if args.seed is not None or "seed" not in mapping:
        mapping["seed"] = _seed(args)
    cfg = ExperimentConfig.from_mapping(mapping)
    report = run_experiment(cfg)
    _emit(report.to_json(), args.output)
    agg = report.aggregate
    logger.info("success frequency %s over %d trials", agg["success_frequency"], agg["n_trials"])
    return 0


def cmd_bench_mailman(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    rows = bench_mailman(sizes, trials=args.trials, seed=_seed(args))
    _emit(_dumps({"rows": rows}), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmsketch", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("reduce", help="reduce the feature dimension of a matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "tsv"))
    p.add_argument("--method", required=True,
                   choices=("lvg", "sampling", "rp", "asvd", "jl", "none"))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--r", type=int, help="sample/projection size for lvg and jl")
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--c2", type=float, default=1.0)
    p.add_argument("--variant", choices=("dense", "achlioptas"), default="dense")
    p.add_argument("--mailman", action="store_true", help="multiply through the mailman algorithm")
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("kmeans", help="restarted Lloyd k-means")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=("csv", "tsv"))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_kmeans)

    p = sub.add_parser("eval", help="approximation-ratio experiment")
    p.add_argument("--config", help="key = value experiment file")
    p.add_argument("--method", choices=("lvg", "sampling", "rp", "asvd", "jl", "none"))
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--r", type=int)
    p.add_argument("--c1", type=float)
    p.add_argument("--c2", type=float)
    p.add_argument("--variant", choices=("dense", "achlioptas"))
    p.add_argument("--mailman", action="store_true")
    p.add_argument("--restarts", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--oracle", choices=("enumeration", "best_of_restarts"))
    p.add_argument("--input")
    p.add_argument("--format", choices=("csv", "tsv"))
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override any config key (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench-mailman", help="mailman vs dense matrix-vector products")
    p.add_argument("--sizes", default="16,256,1024,4096")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench_mailman)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"kmsketch: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, DataFormatError, ValueError, TypeError, OSError) as exc:
        print(f"kmsketch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
