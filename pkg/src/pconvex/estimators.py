"""Monte Carlo estimators of the posterior probability of convexity.

* :func:`vanilla_mc` draws from the posterior and averages convexity indicators.
* :func:`change_of_measure` reweights an older sample cache by likelihood ratios.
* :func:`acceptance_rejection` keeps a thinned subset of an older cache and tops
  it up with fresh draws.
* :func:`conditional_mc` integrates the radial coordinate analytically along
  uniform directions.

Every per-sample computation uses its own substream ``rng.substream(k)``, so
estimates do not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.typing import NDArray

from .cone import DesignSet, is_convex_vector, step_interval
from .lp import LpNumericalError
from .mathkit import RngStream, chi2_cdf, f_cdf, sample_sphere_direction
from .posterior import MarginalLaw, likelihood_ratio, lr_supremum

log = logging.getLogger(__name__)

Z95 = 1.96
#: Likelihood-ratio bound above which sample reuse is abandoned.
LR_SUP_LIMIT = 1e4
#: Observed likelihood ratio above which a reused estimate is flagged.
LR_OBSERVED_LIMIT = 1e3

ESTIMATORS = ("vanilla", "com", "ar", "cmc")


class EstimatorError(RuntimeError):
    pass


@dataclass(frozen=True)
class EfficiencyRecord:
    efficiency: float
    log10_efficiency: float
    infinite: bool = False


@dataclass(frozen=True)
class EstimateReport:
    """One estimate of ``P(f convex | data)`` with a 95% normal CI."""

    p_hat: float
    half_width: float
    sample_var: float
    m: int
    elapsed: float
    estimator: str
    iteration: int = 0
    flags: frozenset = field(default_factory=frozenset)
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def ci(self) -> tuple[float, float]:
        return self.p_hat - self.half_width, self.p_hat + self.half_width

    def with_flags(self, *extra: str) -> "EstimateReport":
        return replace(self, flags=self.flags | frozenset(extra))


@dataclass(frozen=True, eq=False)
class SampleCache:
    """Posterior draws with their convexity indicators, kept for reuse."""

    iteration: int
    samples: NDArray[np.float64]
    indicators: NDArray[np.bool_]
    law: MarginalLaw

    def __len__(self) -> int:
        return self.indicators.shape[0]


def make_report(values, elapsed, estimator, iteration=0, flags=(), **diagnostics) -> EstimateReport:
    values = np.asarray(values, dtype=np.float64)
    m = values.shape[0]
    p_hat = float(values.mean())
    var = float(values.var(ddof=1)) if m > 1 else 0.0
    flags = set(flags)
    if p_hat > 1.0:
        flags.add("over_one")
    return EstimateReport(
        p_hat, Z95 * math.sqrt(var / m), var, m, elapsed, estimator, iteration,
        frozenset(flags), diagnostics,
    )


def wilson_interval(report: EstimateReport) -> tuple[float, float]:
    """Wilson score interval for an indicator-average estimate."""
    m, p = report.m, min(max(report.p_hat, 0.0), 1.0)
    z2 = Z95 * Z95
    centre = (p + z2 / (2 * m)) / (1 + z2 / m)
    half = Z95 * math.sqrt(p * (1 - p) / m + z2 / (4 * m * m)) / (1 + z2 / m)
    return centre - half, centre + half


def efficiency(report: EstimateReport) -> EfficiencyRecord:
    """Inverse of (time per replication x variance per replication)."""
    if report.sample_var <= 0.0:
        return EfficiencyRecord(math.inf, math.inf, True)
    per_rep = report.elapsed / report.m
    if per_rep <= 0.0:
        return EfficiencyRecord(math.inf, math.inf, True)
    eff = 1.0 / (per_rep * report.sample_var)
    return EfficiencyRecord(eff, math.log10(eff))


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _indicators(ds, samples, threads, solver, offset=0):
    def check(k):
        try:
            return is_convex_vector(ds, samples[k], solver)
        except LpNumericalError as exc:
            raise EstimatorError(f"LP failure on sample {k + offset}: {exc}") from exc

    return np.array(_map(check, range(len(samples)), threads), dtype=bool)


def _draw(law: MarginalLaw, rng: RngStream, count: int, label=None) -> NDArray:
    if count == 0:
        return np.zeros((0, law.r))
    base = rng if label is None else rng.substream(label)
    return np.array([law.sample(base.substream(k)) for k in range(count)])


def vanilla_mc(law: MarginalLaw, ds: DesignSet, m: int, rng: RngStream, *,
               iteration: int = 0, threads: int = 1, solver=None):
    """Plain Monte Carlo; returns ``(report, cache)``."""
    if m < 2:
        raise ValueError("m must be at least 2")
    start = time.perf_counter()
    samples = _draw(law, rng, m)
    ind = _indicators(ds, samples, threads, solver)
    elapsed = time.perf_counter() - start
    report = make_report(ind, elapsed, "vanilla", iteration)
    return report, SampleCache(iteration, samples, ind, law)


def change_of_measure(cache: SampleCache, current: MarginalLaw, *, iteration: int = 0) -> EstimateReport:
    """Likelihood-ratio reweighting of ``cache`` towards ``current``.

    The estimate is unbiased but may exceed 1; such reports carry the
    ``over_one`` flag, and ``lr_guard`` marks any ratio above
    :data:`LR_OBSERVED_LIMIT`.
    """
    start = time.perf_counter()
    lr = np.atleast_1d(likelihood_ratio(current, cache.law, cache.samples))
    values = cache.indicators * lr
    flags = {"reused"}
    max_lr = float(lr.max()) if lr.size else 0.0
    if max_lr > LR_OBSERVED_LIMIT:
        flags.add("lr_guard")
    elapsed = time.perf_counter() - start
    return make_report(values, elapsed, "com", iteration, flags,
                       max_lr=max_lr, age=iteration - cache.iteration)


def acceptance_rejection(cache: SampleCache, current: MarginalLaw, ds: DesignSet, m: int,
                         rng: RngStream, *, iteration: int = 0, threads: int = 1, solver=None):
    """Reuse cached draws accepted with probability ``LR / c``; returns ``(report, cache)``.

    Falls back to :func:`vanilla_mc` (flagged ``lr_guard``) when the bound
    ``c`` is infinite or above :data:`LR_SUP_LIMIT`.
    """
    start = time.perf_counter()
    c = lr_supremum(current, cache.law, rng=rng.substream("lr_sup"))
    if not math.isfinite(c) or c > LR_SUP_LIMIT:
        log.info("acceptance-rejection bound c=%g too large at iteration %d; drawing afresh", c, iteration)
        report, new_cache = vanilla_mc(current, ds, m, rng.substream("fresh"),
                                       iteration=iteration, threads=threads, solver=solver)
        report = replace(report, estimator="ar", elapsed=time.perf_counter() - start,
                         flags=report.flags | {"lr_guard"}, diagnostics={"c": c, "accepted": 0})
        return report, new_cache

    lr = np.atleast_1d(likelihood_ratio(current, cache.law, cache.samples))
    u = rng.substream("accept").uniform(size=len(cache))
    accepted = np.flatnonzero(u < lr / c)[:m]
    n_fresh = m - accepted.size
    fresh = _draw(current, rng, n_fresh, "fresh")
    fresh_ind = _indicators(ds, fresh, threads, solver, offset=accepted.size)
    samples = np.vstack([cache.samples[accepted], fresh])
    ind = np.concatenate([cache.indicators[accepted], fresh_ind])
    elapsed = time.perf_counter() - start
    flags = {"reused"} if accepted.size else set()
    report = make_report(ind, elapsed, "ar", iteration, flags, c=c, accepted=int(accepted.size))
    return report, SampleCache(iteration, samples, ind, current)


def f_t_given_z(t: float, kind: str, r: int, dof: float | None = None) -> float:
    """CDF of the signed radial step ``T`` along a fixed direction.

    Gaussian laws: ``(1 + sign(t) F_chi2_r(t^2)) / 2``.
    Student-t laws: ``(1 + sign(t) F_F(r, dof)(t^2 / r)) / 2``.
    """
    if t == 0.0:
        return 0.5
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    if kind == "gaussian":
        mass = chi2_cdf(t * t, r)
    elif kind == "student_t":
        if dof is None:
            raise ValueError("student_t needs dof")
        mass = f_cdf(t * t / r, r, dof)
    else:
        raise ValueError(f"unknown law kind {kind!r}")
    return 0.5 * (1.0 + math.copysign(mass, t))


def conditional_mc(law: MarginalLaw, ds: DesignSet, m: int, rng: RngStream, *,
                   iteration: int = 0, threads: int = 1, solver=None) -> EstimateReport:
    """Conditional Monte Carlo over uniformly random directions."""
    if m < 2:
        raise ValueError("m must be at least 2")
    start = time.perf_counter()
    lower = law.chol.lower
    r = law.r

    def one(k):
        z = sample_sphere_direction(rng.substream(k), r)
        try:
            iv = step_interval(ds, law.loc, lower @ z, solver)
        except LpNumericalError as exc:
            raise EstimatorError(f"LP failure on direction {k}: {exc}") from exc
        if iv.empty:
            return 0.0
        return (f_t_given_z(iv.t_max, law.kind, r, law.dof)
                - f_t_given_z(iv.t_min, law.kind, r, law.dof))

    values = _map(one, range(m), threads)
    elapsed = time.perf_counter() - start
    return make_report(values, elapsed, "cmc", iteration)
