"""Compare the compiled and pure-Python simplex kernels.

Usage::

    python3 benchmarks/bench_simplex.py [--repeats 3] [--samples 200]

Times three workloads per kernel: feasibility systems from
``is_convex_vector``, the min/max programs of ``step_interval``, and a
full vanilla + conditional Monte Carlo estimate on a 2-D design.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pconvex.cone import is_convex_vector, step_interval
from pconvex.estimators import conditional_mc, vanilla_mc
from pconvex.experiments import generate_design_points
from pconvex.lp import KERNELS, SimplexSolver
from pconvex.mathkit import RngStream
from pconvex.posterior import MarginalLaw


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def workloads(samples: int, d: int):
    rng = RngStream(2024)
    ds = generate_design_points(d, rng.substream("design"))
    pts = ds.points
    truth = np.sum(pts * pts, axis=1)
    gen = rng.substream("vectors").generator
    vectors = truth + 0.05 * gen.standard_normal((samples, ds.r))
    dirs = gen.standard_normal((samples, ds.r))
    law = MarginalLaw("gaussian", truth, 1e-3 * np.eye(ds.r))

    def feas(solver):
        for g in vectors:
            is_convex_vector(ds, g, solver)

    def interval(solver):
        for w in dirs:
            step_interval(ds, truth, w, solver)

    def estimate(solver):
        vanilla_mc(law, ds, samples, rng.substream("van"), solver=solver)
        conditional_mc(law, ds, samples, rng.substream("cmc"), solver=solver)

    return ds, {"feasibility": feas, "step interval": interval, "estimate": estimate}


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--samples", type=int, default=200)
    parser.add_argument("--dims", type=int, nargs="+", default=[1, 3])
    args = parser.parse_args(argv)
    kernels = [k for k in ("cython", "python") if k in KERNELS]
    print(f"kernels available: {', '.join(kernels)}")
    print(f"{'d':>3} {'r':>4} {'workload':<14}" + "".join(f"{k:>12}" for k in kernels) + f"{'speedup':>10}")
    for d in args.dims:
        ds, loads = workloads(args.samples, d)
        for name, fn in loads.items():
            times = {k: _best_of(lambda: fn(SimplexSolver(k)), args.repeats) for k in kernels}
            speed = times["python"] / times["cython"] if len(times) == 2 else float("nan")
            print(f"{d:>3} {ds.r:>4} {name:<14}" + "".join(f"{times[k]:>11.3f}s" for k in kernels)
                  + f"{speed:>9.1f}x")


if __name__ == "__main__":
    main()
