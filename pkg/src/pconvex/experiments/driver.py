"""Sequential convexity test: observe, update the posterior, estimate.

Each iteration draws one observation vector, applies the conjugate update
and (every ``estimate_every`` iterations) estimates the posterior
probability of convexity with the configured estimator. Unknown-variance
runs first spend ``s0 >= r + 1`` pilot observations on the initial
normal-inverse-Wishart state.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable

import numpy as np

from ..cone import DesignSet
from ..estimators import (
    ESTIMATORS,
    LR_OBSERVED_LIMIT,
    LR_SUP_LIMIT,
    EstimateReport,
    SampleCache,
    acceptance_rejection,
    change_of_measure,
    conditional_mc,
    vanilla_mc,
)
from ..mathkit import RngStream
from ..posterior import (
    KnownVarPosterior,
    NiwPosterior,
    init_jeffreys,
    init_known,
    lr_supremum,
    marginal,
    update_known,
    update_niw,
)
from .design import ambulance_line_count, generate_design_points
from .oracles import TRUTH_FUNCTIONS, AmbulanceOracle, CovarianceSpec, SyntheticOracle

log = logging.getLogger(__name__)

AMBULANCE = "ambulance"


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class RunFailure(RuntimeError):
    """A run aborted mid-way; ``reports`` holds the estimates made so far."""

    def __init__(self, iteration: int, reports: list, cause: BaseException):
        super().__init__(f"run failed at iteration {iteration}: {cause}")
        self.iteration = iteration
        self.reports = reports
        self.cause = cause


@dataclass(frozen=True)
class DesignConfig:
    """Design points: explicit ``points`` or ``per_line`` points on ``n_lines`` chords.

    ``low``/``high`` default to ``[-1, 1]`` for synthetic truths and
    ``[0, 1]`` for the ambulance model; ``n_lines`` defaults to ``d + 1``
    and ``4 * bases + 1`` respectively.
    """

    kind: str = "lines"
    low: float | None = None
    high: float | None = None
    n_lines: int | None = None
    per_line: int = 3
    points: list | None = None

    def __post_init__(self):
        if self.kind not in ("lines", "explicit"):
            raise ConfigError(f"design.kind must be 'lines' or 'explicit', got {self.kind!r}", "kind")
        if self.kind == "explicit" and self.points is None:
            raise ConfigError("explicit design needs 'points'", "kind")
        if self.n_lines is not None and self.n_lines < 1:
            raise ConfigError("design.n_lines must be >= 1", "n_lines")
        if self.per_line < 1:
            raise ConfigError("design.per_line must be >= 1", "per_line")


@dataclass(frozen=True)
class ReusePolicy:
    """When reusing estimators may recycle old samples.

    Fresh samples are drawn for iterations ``n <= fresh_until``; afterwards
    a cache is reused until it is ``refresh_every`` iterations old, and
    never beyond age ``max_age``.
    """

    fresh_until: int = 30
    refresh_every: int = 5
    max_age: int = 4

    def __post_init__(self):
        if self.fresh_until < 0 or self.refresh_every < 1 or self.max_age < 1:
            raise ConfigError("reuse policy values must be positive", "reuse")

    def may_reuse(self, n: int, cache: SampleCache | None) -> bool:
        if cache is None or n <= self.fresh_until:
            return False
        age = n - cache.iteration
        return 0 <= age < self.refresh_every and age <= self.max_age


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one sequential run."""

    dimension: int
    truth: str
    iterations: int
    mc_samples: int
    estimator: str
    seed: int
    design: DesignConfig = field(default_factory=DesignConfig)
    covariance: CovarianceSpec = field(default_factory=CovarianceSpec)
    variance_known: bool = True
    reuse: ReusePolicy = field(default_factory=ReusePolicy)
    estimate_every: int = 1
    initial_samples: int | None = None
    checkpoint_every: int = 0
    output: str | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ConfigError("dimension must be >= 1", "dimension")
        if self.truth != AMBULANCE and self.truth not in TRUTH_FUNCTIONS:
            raise ConfigError(f"unknown truth {self.truth!r}; have {sorted(TRUTH_FUNCTIONS) + [AMBULANCE]}", "truth")
        if self.truth == AMBULANCE:
            if self.dimension % 2:
                raise ConfigError("ambulance dimension must be 2 * number of bases", "dimension")
            if self.variance_known:
                raise ConfigError("the ambulance model has no known covariance; set variance_known to false", "variance_known")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1", "iterations")
        if self.mc_samples < 2:
            raise ConfigError("mc_samples must be >= 2", "mc_samples")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}; have {list(ESTIMATORS)}", "estimator")
        if self.estimate_every < 1:
            raise ConfigError("estimate_every must be >= 1", "estimate_every")
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be >= 0", "checkpoint_every")

    @property
    def n_bases(self) -> int:
        return self.dimension // 2

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        """Strict construction: unknown keys and missing required keys raise :class:`ConfigError`."""
        data = dict(_check_keys(cls, data, "config"))
        nested = {"design": DesignConfig, "covariance": CovarianceSpec, "reuse": ReusePolicy}
        for key, sub in nested.items():
            if key in data:
                if not isinstance(data[key], dict):
                    raise ConfigError(f"field '{key}' must be an object", key)
                data[key] = sub(**_check_keys(sub, data[key], key))
        try:
            return cls(**data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)


def _check_keys(cls, data, where: str) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be a JSON object")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(unknown)}", unknown[0])
    required = [n for n, f in known.items() if f.default is MISSING and f.default_factory is MISSING]
    missing = [n for n in required if n not in data]
    if missing:
        raise ConfigError(f"missing required field(s) in {where}: {', '.join(missing)}", missing[0])
    return data


# ---------------------------------------------------------------------------
# setup


def build_design(cfg: ExperimentConfig, rng: RngStream) -> DesignSet:
    dc = cfg.design
    if dc.kind == "explicit":
        ds = DesignSet(dc.points)
        if ds.d != cfg.dimension:
            raise ConfigError(f"explicit points have dimension {ds.d}, config says {cfg.dimension}", "points")
        return ds
    amb = cfg.truth == AMBULANCE
    low = dc.low if dc.low is not None else (0.0 if amb else -1.0)
    high = dc.high if dc.high is not None else 1.0
    n_lines = dc.n_lines
    if n_lines is None and amb:
        n_lines = ambulance_line_count(cfg.n_bases)
    return generate_design_points(cfg.dimension, rng, low=low, high=high,
                                  n_lines=n_lines, per_line=dc.per_line)


def build_oracle(cfg: ExperimentConfig, ds: DesignSet):
    if cfg.truth == AMBULANCE:
        return AmbulanceOracle(cfg.n_bases, ds)
    return SyntheticOracle(cfg.truth, ds, cfg.covariance)


def initial_state(cfg: ExperimentConfig, oracle, obs_rng: RngStream, record=None):
    """Prior for known variance, or the pilot-sample NIW state."""
    r = oracle.r
    if cfg.variance_known:
        return init_known(oracle.gamma)
    s0 = cfg.initial_samples if cfg.initial_samples is not None else r + 1
    if s0 < r + 1:
        raise ConfigError(f"initial_samples must be >= r + 1 = {r + 1}", "initial_samples")
    pilot = np.array([oracle.sample(obs_rng.substream("pilot", j)) for j in range(s0)])
    if record is not None:
        for j, y in enumerate(pilot):
            record(j - s0, y)
    return init_jeffreys(pilot)


# ---------------------------------------------------------------------------
# estimation with reuse


class _Estimator:
    """Applies the configured estimator and reuse policy across iterations."""

    def __init__(self, cfg: ExperimentConfig, ds: DesignSet, threads: int, solver):
        self.cfg = cfg
        self.ds = ds
        self.threads = threads
        self.solver = solver
        self.cache: SampleCache | None = None

    def __call__(self, law, n: int, rng: RngStream) -> EstimateReport:
        cfg, kw = self.cfg, dict(iteration=n, threads=self.threads, solver=self.solver)
        m = cfg.mc_samples
        if cfg.estimator == "cmc":
            return conditional_mc(law, self.ds, m, rng, **kw)
        if cfg.estimator == "vanilla":
            report, _ = vanilla_mc(law, self.ds, m, rng, **kw)
            return report
        if cfg.estimator == "ar":
            if self.cache is not None and n > cfg.reuse.fresh_until:
                report, self.cache = acceptance_rejection(self.cache, law, self.ds, m, rng, **kw)
                return report
            report, self.cache = vanilla_mc(law, self.ds, m, rng, **kw)
            return replace(report, estimator="ar")
        # change of measure
        flags = set()
        if cfg.reuse.may_reuse(n, self.cache):
            c = lr_supremum(law, self.cache.law, rng=rng.substream("lr_sup"))
            if math.isfinite(c) and c <= LR_SUP_LIMIT:
                report = change_of_measure(self.cache, law, iteration=n)
                if "lr_guard" not in report.flags:
                    return report
                log.warning("iteration %d: likelihood ratio %.3g exceeds %g; drawing afresh",
                            n, report.diagnostics.get("max_lr", math.nan), LR_OBSERVED_LIMIT)
            else:
                log.warning("iteration %d: likelihood-ratio bound %.3g exceeds %g; drawing afresh",
                            n, c, LR_SUP_LIMIT)
            flags.add("lr_guard")
        report, self.cache = vanilla_mc(law, self.ds, m, rng, **kw)
        return replace(report, estimator="com", flags=report.flags | flags)


# ---------------------------------------------------------------------------
# persistence


def state_to_dict(state: KnownVarPosterior | NiwPosterior) -> dict:
    if isinstance(state, KnownVarPosterior):
        return {"kind": "known", "n": state.n, "mu_n": state.mu_n.tolist(),
                "lambda_n": state.lambda_n.tolist(), "gamma": state.gamma.tolist()}
    return {"kind": "niw", "n": state.n, "mu_n": state.mu_n.tolist(), "kappa_n": state.kappa_n,
            "upsilon_n": state.upsilon_n, "xi_n": state.xi_n.tolist()}


def state_from_dict(data: dict) -> KnownVarPosterior | NiwPosterior:
    kind = data.get("kind")
    try:
        if kind == "known":
            lam = np.asarray(data["lambda_n"], dtype=np.float64)
            return KnownVarPosterior(np.asarray(data["mu_n"], dtype=np.float64), lam,
                                     np.asarray(data["gamma"], dtype=np.float64), int(data["n"]))
        if kind == "niw":
            return NiwPosterior(np.asarray(data["mu_n"], dtype=np.float64), float(data["kappa_n"]),
                                float(data["upsilon_n"]), np.asarray(data["xi_n"], dtype=np.float64),
                                int(data["n"]))
    except KeyError as exc:
        raise ValueError(f"posterior file lacks field {exc.args[0]!r}") from None
    raise ValueError(f"unknown posterior kind {kind!r}")


def write_checkpoint(path, state, ds: DesignSet, cfg: ExperimentConfig):
    payload = {"iteration": state.n, "seed": cfg.seed, "points": ds.points.tolist(),
               "posterior": state_to_dict(state)}
    tmp = Path(str(path) + ".tmp")
    tmp.write_text(json.dumps(payload))
    tmp.replace(path)


def load_checkpoint(path) -> tuple[KnownVarPosterior | NiwPosterior, np.ndarray | None]:
    """Posterior state (and design points, if stored) from a checkpoint or bare state file."""
    data = json.loads(Path(path).read_text())
    if "posterior" in data:
        points = np.asarray(data["points"]) if "points" in data else None
        return state_from_dict(data["posterior"]), points
    return state_from_dict(data), None


class ObservationLog:
    """CSV rows ``iteration,point_index,value``; pilot observations get iterations ``<= 0``."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(["iteration", "point_index", "value"])

    def __call__(self, iteration: int, y):
        for i, v in enumerate(y):
            self._writer.writerow([iteration, i, repr(float(v))])

    def close(self):
        self._fh.close()


def read_observations(path) -> dict[int, np.ndarray]:
    rows: dict[int, dict[int, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.setdefault(int(row["iteration"]), {})[int(row["point_index"])] = float(row["value"])
    return {n: np.array([vals[i] for i in sorted(vals)]) for n, vals in sorted(rows.items())}


# ---------------------------------------------------------------------------
# driver


@dataclass
class RunContext:
    """Objects built while setting up a run, exposed for inspection."""

    design: DesignSet
    oracle: object
    state: KnownVarPosterior | NiwPosterior | None = None


def run_sequential(cfg: ExperimentConfig, *, threads: int = 1, solver=None,
                   observation_log: str | Path | None = None,
                   checkpoint_path: str | Path | None = None,
                   on_report: Callable[[EstimateReport], None] | None = None,
                   context: RunContext | None = None) -> list[EstimateReport]:
    """Run the sequential test and return one report per estimated iteration.

    Raises
    ------
    RunFailure
        Wraps any error raised mid-run, carrying the reports produced so far.
    """
    root = RngStream(cfg.seed)
    ds = build_design(cfg, root.substream("design"))
    oracle = build_oracle(cfg, ds)
    obs_rng = root.substream("observations")
    est_rng = root.substream("estimate")
    if context is not None:
        context.design, context.oracle = ds, oracle
    obs_log = ObservationLog(observation_log) if observation_log is not None else None
    reports: list[EstimateReport] = []
    n = 0
    try:
        state = initial_state(cfg, oracle, obs_rng, obs_log)
        estimate = _Estimator(cfg, ds, threads, solver)
        for n in range(1, cfg.iterations + 1):
            y = oracle.sample(obs_rng.substream(n))
            if obs_log is not None:
                obs_log(n, y)
            state = update_known(state, y) if cfg.variance_known else update_niw(state, y)
            if context is not None:
                context.state = state
            if n % cfg.estimate_every == 0:
                report = estimate(marginal(state), n, est_rng.substream(n))
                reports.append(report)
                if on_report is not None:
                    on_report(report)
            if checkpoint_path is not None and cfg.checkpoint_every and n % cfg.checkpoint_every == 0:
                write_checkpoint(checkpoint_path, state, ds, cfg)
    except ConfigError:
        raise
    except Exception as exc:
        raise RunFailure(n, reports, exc) from exc
    finally:
        if obs_log is not None:
            obs_log.close()
    if checkpoint_path is not None:
        write_checkpoint(checkpoint_path, state, ds, cfg)
    return reports
