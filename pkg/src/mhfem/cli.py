"""Command-line driver: ``python -m mhfem run --example 1 --grids 16,32``."""

from __future__ import annotations

import argparse
import os
import sys

from .report import RunConfig, run

__all__ = ["build_parser", "main"]


def _grid_list(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mhfem", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="solve an example and report majorants")
    r.add_argument("--example", type=int, choices=(1, 2, 3), required=True)
    r.add_argument("--grids", type=_grid_list, default=(16, 32), help="cells per side, e.g. 16,32,64")
    r.add_argument("--modes", type=int, default=None, help="truncation index N (example default if omitted)")
    r.add_argument("--tol", type=float, default=1e-10, help="relative preconditioned MINRES residual")
    r.add_argument("--workers", type=int, default=1, help="threads solving modes in parallel")
    r.add_argument("--out", default=None, help="directory receiving example<id>.csv and example<id>.jsonl")
    r.add_argument("--format", choices=("table", "csv", "jsonl"), default="table")
    r.add_argument("--overall", action="store_true", help="add the aggregate row over all modes")
    r.add_argument("--denominator", choices=("h1semi", "weighted"), default="h1semi",
                   help="error measure in the per-mode efficiency index")
    r.add_argument("--ref-factor", type=int, default=2, help="refinement of the Example 3 reference mesh")
    r.add_argument("--timing", action="store_true", help="fill the seconds column (breaks byte-identical output)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            example=args.example, grids=args.grids, N=args.modes, tol=args.tol,
            workers=args.workers, out=args.out, format=args.format, overall=args.overall,
            denominator=args.denominator, ref_factor=args.ref_factor, timing=args.timing,
        )
    except ValueError as exc:
        print(f"mhfem: {exc}", file=sys.stderr)
        return 2
    report = run(config)
    text = {"table": report.to_table, "csv": report.to_csv, "jsonl": report.to_jsonl}[config.format]()
    sys.stdout.write(text)
    if config.out:
        os.makedirs(config.out, exist_ok=True)
        stem = os.path.join(config.out, f"example{config.example}")
        with open(stem + ".csv", "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        with open(stem + ".jsonl", "w", encoding="utf-8") as fh:
            fh.write(report.to_jsonl())
    for f in report.failures:
        print(f"mhfem: {f['message']}", file=sys.stderr)
    return 0 if report.ok else 1
