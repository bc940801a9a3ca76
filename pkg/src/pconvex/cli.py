"""Command-line interface.

Subcommands::

    pconvex run      --config cfg.json --out runs.csv [--seed S] [--threads T] [--estimate-every K]
    pconvex estimate --points pts.json --posterior ckpt.json --estimator vanilla --m 1000 --seed 1
    pconvex oracle1d --points x.txt --values g.txt
    pconvex diag-lr  --gamma 1 --n 50 --reps 2000 --seed 1

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure
(partial output is kept).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .cone import DesignSet, is_convex_vector, oracle_convex_1d
from .estimators import EstimateReport, conditional_mc, efficiency, vanilla_mc
from .experiments import ConfigError, ExperimentConfig, RunFailure, load_checkpoint, run_sequential
from .mathkit import RngStream
from .posterior import marginal

CSV_HEADER = ["iteration", "estimator", "p_hat", "half_width", "sample_var",
              "elapsed_sec", "log10_efficiency", "seed", "flags"]

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunRecordRow:
    """One CSV row of a run; floats are written with ``repr`` so rows round-trip exactly."""

    iteration: int
    estimator: str
    p_hat: float
    half_width: float
    sample_var: float
    elapsed_sec: float
    log10_efficiency: float
    seed: int
    flags: frozenset = frozenset()

    @classmethod
    def from_report(cls, report: EstimateReport, seed: int) -> "RunRecordRow":
        eff = efficiency(report)
        return cls(report.iteration, report.estimator, report.p_hat, report.half_width,
                   report.sample_var, report.elapsed, eff.log10_efficiency, seed, report.flags)

    def to_row(self) -> list[str]:
        log_eff = "inf" if math.isinf(self.log10_efficiency) else repr(float(self.log10_efficiency))
        return [str(self.iteration), self.estimator, repr(float(self.p_hat)), repr(float(self.half_width)),
                repr(float(self.sample_var)), repr(float(self.elapsed_sec)), log_eff, str(self.seed),
                "|".join(sorted(self.flags))]

    @classmethod
    def from_row(cls, row: dict) -> "RunRecordRow":
        flags = frozenset(f for f in row["flags"].split("|") if f)
        return cls(int(row["iteration"]), row["estimator"], float(row["p_hat"]), float(row["half_width"]),
                   float(row["sample_var"]), float(row["elapsed_sec"]), float(row["log10_efficiency"]),
                   int(row["seed"]), flags)


def read_run_csv(path) -> list[RunRecordRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected header {reader.fieldnames}")
        return [RunRecordRow.from_row(row) for row in reader]


# ---------------------------------------------------------------------------
# input helpers


def _line_of(text: str, key: str) -> int | None:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config(path) -> ExperimentConfig:
    """Parse and validate a JSON config; errors carry the file name and, where known, the line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    try:
        return ExperimentConfig.from_dict(data)
    except ConfigError as exc:
        line = _line_of(text, exc.field) if exc.field else None
        where = f"{path}:{line}" if line else str(path)
        raise UsageError(f"{where}: {exc}") from None


def load_numbers(path) -> np.ndarray:
    """Numbers from a JSON array or a whitespace/comma separated text file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        if text.lstrip().startswith("["):
            arr = np.asarray(json.loads(text), dtype=np.float64)
        else:
            rows = [r for r in (line.replace(",", " ").split() for line in text.splitlines()) if r]
            arr = np.asarray(rows, dtype=np.float64)
            if arr.ndim == 2 and 1 in arr.shape:
                arr = arr.ravel()
    except (ValueError, json.JSONDecodeError) as exc:
        raise UsageError(f"{path}: cannot parse numbers ({exc})") from None
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{path}: values must be finite")
    return arr


# ---------------------------------------------------------------------------
# commands


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.estimate_every is not None:
        if args.estimate_every < 1:
            raise UsageError("--estimate-every must be >= 1")
        overrides["estimate_every"] = args.estimate_every
    if overrides:
        cfg = replace(cfg, **overrides)
    out = args.out or cfg.output
    if not out:
        raise UsageError("no output path: pass --out or set 'output' in the config")
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)

        def emit(report):
            writer.writerow(RunRecordRow.from_report(report, cfg.seed).to_row())
            fh.flush()

        try:
            run_sequential(cfg, threads=args.threads, observation_log=args.observations,
                           checkpoint_path=args.checkpoint, on_report=emit)
        except RunFailure as exc:
            print(f"error: {exc}; {len(exc.reports)} rows written to {out}", file=sys.stderr)
            return EXIT_RUNTIME
    return EXIT_OK


def cmd_estimate(args) -> int:
    points = load_numbers(args.points)
    try:
        state, _ = load_checkpoint(args.posterior)
    except (OSError, ValueError) as exc:
        raise UsageError(f"{args.posterior}: {exc}") from None
    try:
        ds = DesignSet(points)
        law = marginal(state)
        if law.r != ds.r:
            raise ValueError(f"posterior has {law.r} components but there are {ds.r} points")
        law.chol
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise UsageError(str(exc)) from None
    if args.m < 2:
        raise UsageError("--m must be >= 2")
    rng = RngStream(args.seed)
    if args.estimator == "vanilla":
        report, _ = vanilla_mc(law, ds, args.m, rng, threads=args.threads)
    else:
        report = conditional_mc(law, ds, args.m, rng, threads=args.threads)
    print(json.dumps({"p_hat": report.p_hat, "half_width": report.half_width}))
    return EXIT_OK


def cmd_oracle1d(args) -> int:
    x = load_numbers(args.points)
    g = load_numbers(args.values)
    if x.ndim == 2:
        if x.shape[1] != 1:
            raise UsageError(f"oracle1d needs one-dimensional points, got d={x.shape[1]}")
        x = x[:, 0]
    if g.ndim != 1 or x.shape != g.shape:
        raise UsageError("points and values must be equally long lists")
    order = np.argsort(x, kind="stable")
    x, g = x[order], g[order]
    try:
        verdict = oracle_convex_1d(x, g)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.check_lp and verdict != is_convex_vector(DesignSet(x), g):
        print("error: slope rule and LP test disagree", file=sys.stderr)
        return EXIT_RUNTIME
    print("convex" if verdict else "nonconvex")
    return EXIT_OK


def cmd_diag_lr(args) -> int:
    from .diagnostics import lr_bound_diagnostic

    try:
        diag = lr_bound_diagnostic(args.gamma, args.n, args.reps, RngStream(args.seed), truth=args.truth)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["replication", "log_bound"])
            for k, v in enumerate(diag.log_bounds):
                writer.writerow([k, repr(float(v))])
    print(json.dumps(diag.summary()))
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pconvex", description="Bayesian sequential convexity testing.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sequential experiment and write per-iteration estimates as CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--estimate-every", type=int)
    p.add_argument("--observations", help="also write observations (iteration,point_index,value) here")
    p.add_argument("--checkpoint", help="write the posterior state here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("estimate", help="estimate P(convex) under a stored posterior")
    p.add_argument("--points", required=True)
    p.add_argument("--posterior", required=True)
    p.add_argument("--estimator", choices=("vanilla", "cmc"), default="vanilla")
    p.add_argument("--m", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("oracle1d", help="slope-rule convexity check for one-dimensional data")
    p.add_argument("--points", required=True)
    p.add_argument("--values", required=True)
    p.add_argument("--check-lp", action="store_true", help="also run the LP test and require agreement")
    p.set_defaults(func=cmd_oracle1d)

    p = sub.add_parser("diag-lr", help="simulate the likelihood-ratio bound and compare with its limit law")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--truth", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV of simulated log bounds")
    p.set_defaults(func=cmd_diag_lr)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
