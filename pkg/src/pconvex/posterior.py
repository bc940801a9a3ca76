"""Conjugate posteriors on the vector of function values.

Two models are supported:

* known sampling covariance ``Gamma``: Gaussian prior, Gaussian posterior
  ``N(mu_n, Lambda_n)``;
* unknown ``Gamma``: normal-inverse-Wishart posterior, whose marginal on the
  function values is a multivariate Student-t.

States are immutable; each update returns a new state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from .mathkit import (
    CholFactor,
    NotPositiveDefinite,
    RngStream,
    cholesky,
    sample_mvn,
    sample_mvt,
    spd_inverse,
    spd_inverse_update,
    spd_solve,
)

#: Prior covariance multiplier relative to the largest sampling variance.
DEFAULT_PRIOR_SCALE = 1e6


class FamilyMismatch(ValueError):
    """Two laws of different kinds were combined."""


def _vec(v, r=None, name="vector") -> NDArray[np.float64]:
    v = np.asarray(v, dtype=np.float64).ravel()
    if r is not None and v.shape[0] != r:
        raise ValueError(f"{name} has length {v.shape[0]}, expected {r}")
    return v


def _mat(a, r=None, name="matrix") -> NDArray[np.float64]:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if r is not None and a.shape != (r, r):
        raise ValueError(f"{name} has shape {a.shape}, expected {(r, r)}")
    return a


@dataclass(frozen=True, eq=False)
class KnownVarPosterior:
    """``N(mu_n, lambda_n)`` posterior with fixed sampling covariance ``gamma``."""

    mu_n: NDArray[np.float64]
    lambda_n: NDArray[np.float64]
    gamma: NDArray[np.float64]
    n: int = 0
    precision: NDArray[np.float64] = field(default=None, repr=False)

    @property
    def r(self) -> int:
        return self.mu_n.shape[0]

    @cached_property
    def gamma_inv(self) -> NDArray[np.float64]:
        return spd_inverse(cholesky(self.gamma))


@dataclass(frozen=True, eq=False)
class NiwPosterior:
    """Normal-inverse-Wishart state ``(mu_n, kappa_n, upsilon_n, xi_n)``.

    ``xi_n`` is the accumulated scatter (the inverse-Wishart scale matrix in
    the usual parameterization), so ``Gamma | data ~ InvWishart(upsilon_n,
    xi_n)`` and ``f | Gamma, data ~ N(mu_n, Gamma / kappa_n)``.
    """

    mu_n: NDArray[np.float64]
    kappa_n: float
    upsilon_n: float
    xi_n: NDArray[np.float64]
    n: int = 0

    @property
    def r(self) -> int:
        return self.mu_n.shape[0]


@dataclass(frozen=True, eq=False)
class MarginalLaw:
    """Marginal posterior law of the function values.

    ``kind`` is ``"gaussian"`` (``scale`` is the covariance, ``dof`` is None)
    or ``"student_t"`` (``scale`` is the scale matrix, ``dof`` the degrees of
    freedom).
    """

    kind: str
    loc: NDArray[np.float64]
    scale: NDArray[np.float64]
    dof: float | None = None

    def __post_init__(self):
        if self.kind not in ("gaussian", "student_t"):
            raise ValueError(f"unknown law kind {self.kind!r}")
        if self.kind == "student_t" and (self.dof is None or self.dof <= 0):
            raise ValueError("student_t law needs positive dof")

    @property
    def r(self) -> int:
        return self.loc.shape[0]

    @cached_property
    def chol(self) -> CholFactor:
        return cholesky(self.scale)

    def sample(self, rng: RngStream) -> NDArray[np.float64]:
        if self.kind == "gaussian":
            return sample_mvn(rng, self.loc, self.chol)
        return sample_mvt(rng, self.dof, self.loc, self.chol)


# ---------------------------------------------------------------------------
# known variance


def init_known(gamma: ArrayLike, mu0: ArrayLike | None = None,
               lambda0: ArrayLike | None = None) -> KnownVarPosterior:
    """Gaussian prior; defaults to mean 0 and a diagonal covariance
    ``1e6 * max(diag(gamma))``."""
    gamma = _mat(gamma, name="gamma")
    r = gamma.shape[0]
    cholesky(gamma)  # validates SPD
    mu0 = np.zeros(r) if mu0 is None else _vec(mu0, r, "mu0")
    if lambda0 is None:
        lambda0 = DEFAULT_PRIOR_SCALE * float(np.max(np.diag(gamma))) * np.eye(r)
    lambda0 = _mat(lambda0, r, "lambda0")
    factor = cholesky(lambda0, jitter=0.0)
    return KnownVarPosterior(mu0, lambda0, gamma, 0, spd_inverse(factor))


def update_known(state: KnownVarPosterior, ybar: ArrayLike, s: int = 1) -> KnownVarPosterior:
    """Conjugate update with the average ``ybar`` of ``s`` new observations."""
    ybar = _vec(ybar, state.r, "ybar")
    if s < 1:
        raise ValueError("s must be a positive integer")
    prec_prev = state.precision if state.precision is not None else spd_inverse(cholesky(state.lambda_n))
    prec, cov, factor = spd_inverse_update(prec_prev, s * state.gamma_inv)
    rhs = prec_prev @ state.mu_n + s * (state.gamma_inv @ ybar)
    mu = spd_solve(factor, rhs)
    new = KnownVarPosterior(mu, cov, state.gamma, state.n + 1, prec)
    # share the cached inverse of gamma
    new.__dict__["gamma_inv"] = state.gamma_inv
    return new


# ---------------------------------------------------------------------------
# unknown variance


def init_jeffreys(samples: ArrayLike) -> NiwPosterior:
    """Normal-inverse-Wishart state from ``s0 >= r + 1`` pilot observations."""
    y = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    s0, r = y.shape
    if s0 < r + 1:
        raise ValueError(f"need at least r + 1 = {r + 1} initial samples, got {s0}")
    ybar = y.mean(axis=0)
    dev = y - ybar
    scatter = dev.T @ dev
    try:
        cholesky(scatter, jitter=0.0)
    except NotPositiveDefinite:
        raise ValueError(
            "initial scatter matrix is singular; supply more (or less degenerate) initial samples"
        ) from None
    return NiwPosterior(ybar, float(s0), float(s0 - 1), 0.5 * (scatter + scatter.T), 0)


def update_niw(state: NiwPosterior, ybar: ArrayLike, s: int = 1,
               scatter_s: ArrayLike | None = None) -> NiwPosterior:
    """Conjugate update with ``s`` observations of mean ``ybar`` and
    within-batch scatter ``scatter_s`` (zero when ``s == 1``)."""
    ybar = _vec(ybar, state.r, "ybar")
    if s < 1:
        raise ValueError("s must be a positive integer")
    r = state.r
    scatter_s = np.zeros((r, r)) if scatter_s is None else _mat(scatter_s, r, "scatter_s")
    k_prev = state.kappa_n
    kappa = k_prev + s
    mu = (k_prev * state.mu_n + s * ybar) / kappa
    diff = ybar - state.mu_n
    xi = state.xi_n + scatter_s + (k_prev * s / kappa) * np.outer(diff, diff)
    return NiwPosterior(mu, kappa, state.upsilon_n + s, 0.5 * (xi + xi.T), state.n + 1)


def marginal(state: KnownVarPosterior | NiwPosterior) -> MarginalLaw:
    """Marginal law of the function values under ``state``."""
    if isinstance(state, KnownVarPosterior):
        return MarginalLaw("gaussian", state.mu_n, state.lambda_n)
    dof = state.upsilon_n - state.r + 1
    if dof < 1:
        raise ValueError(
            f"marginal dof upsilon_n - r + 1 = {dof} < 1; use more initial samples"
        )
    scale = state.xi_n / (state.kappa_n * dof)
    return MarginalLaw("student_t", state.mu_n, scale, float(dof))


def batch_scatter(observations: ArrayLike) -> tuple[NDArray, NDArray, int]:
    """``(ybar, scatter, s)`` for a batch of observations (rows)."""
    y = np.atleast_2d(np.asarray(observations, dtype=np.float64))
    ybar = y.mean(axis=0)
    dev = y - ybar
    return ybar, dev.T @ dev, y.shape[0]


# ---------------------------------------------------------------------------
# densities and likelihood ratios


def _mahalanobis(law: MarginalLaw, y) -> NDArray:
    """Squared Mahalanobis distance; ``y`` may be (r,) or (k, r)."""
    y = np.asarray(y, dtype=np.float64)
    diff = np.atleast_2d(y - law.loc)
    z = solve_triangular(law.chol.lower, diff.T, lower=True, check_finite=False)
    q = np.sum(z * z, axis=0)
    return q if y.ndim > 1 else q[0]


def log_density(law: MarginalLaw, y: ArrayLike):
    """Normalized log-pdf at ``y`` (a point or an array of points)."""
    r = law.r
    q = _mahalanobis(law, y)
    logdet = law.chol.logdet()
    if law.kind == "gaussian":
        return -0.5 * (r * math.log(2.0 * math.pi) + logdet + q)
    nu = law.dof
    return _t_log_const(law) - 0.5 * (nu + r) * np.log1p(q / nu)


def _same_family(a: MarginalLaw, b: MarginalLaw):
    if a.kind != b.kind:
        raise FamilyMismatch(f"cannot compare a {a.kind} law with a {b.kind} law")
    if a.r != b.r:
        raise ValueError("laws have different dimensions")


def likelihood_ratio(numerator: MarginalLaw, denominator: MarginalLaw, y: ArrayLike):
    """Density ratio ``numerator(y) / denominator(y)``."""
    _same_family(numerator, denominator)
    return np.exp(log_density(numerator, y) - log_density(denominator, y))


def _identical(a: MarginalLaw, b: MarginalLaw) -> bool:
    return (
        a.kind == b.kind and a.dof == b.dof
        and np.array_equal(a.loc, b.loc) and np.array_equal(a.scale, b.scale)
    )


#: Safety multiplier on numerically maximized likelihood-ratio bounds.
LR_SAFETY = 1.01


def lr_supremum(numerator: MarginalLaw, denominator: MarginalLaw,
                rng: RngStream | None = None, n_starts: int = 20) -> float:
    """Upper bound ``c >= sup_y numerator(y) / denominator(y)``.

    Gaussian laws use the closed form of the quadratic maximization (exact);
    Student-t laws are maximized numerically from several starts and the
    result is inflated by :data:`LR_SAFETY`. Returns ``inf`` when the ratio
    is unbounded.
    """
    _same_family(numerator, denominator)
    if _identical(numerator, denominator):
        return 1.0
    if numerator.kind == "gaussian":
        return _gaussian_lr_sup(numerator, denominator)
    return _t_lr_sup(numerator, denominator, rng, n_starts)


def _gaussian_lr_sup(num: MarginalLaw, den: MarginalLaw) -> float:
    # log LR(y) = const - y'Dy/2 + h'y with D the precision gap; bounded iff
    # D is PSD and h has no component along null(D)
    p1 = spd_inverse(num.chol)
    p0 = spd_inverse(den.chol)
    gap = p1 - p0
    gap = 0.5 * (gap + gap.T)
    eig, vec = np.linalg.eigh(gap)
    tol = 1e-10 * max(float(np.max(np.abs(p1))), float(np.max(np.abs(p0))))
    if eig[0] < -tol:
        return math.inf
    a1, a0 = p1 @ num.loc, p0 @ den.loc
    proj = vec.T @ (a1 - a0)
    flat = eig <= tol
    if np.any(np.abs(proj[flat]) > 1e-9 * (np.linalg.norm(a1) + np.linalg.norm(a0) + 1e-300)):
        return math.inf
    log_c = 0.5 * (
        den.chol.logdet() - num.chol.logdet()
        + float(np.sum(proj[~flat] ** 2 / eig[~flat]))
        + den.loc @ a0 - num.loc @ a1
    )
    return math.exp(log_c)


def ar_constant_known(previous: KnownVarPosterior, current: KnownVarPosterior) -> float:
    """Closed-form acceptance-rejection constant for a one-step known-variance update.

    Valid when ``current`` is ``previous`` updated with a single observation
    (``s = 1``), so that the precision gap is ``Gamma^{-1}``.
    """
    p0 = previous.precision if previous.precision is not None else spd_inverse(cholesky(previous.lambda_n))
    p1 = current.precision if current.precision is not None else spd_inverse(cholesky(current.lambda_n))
    h = p1 @ current.mu_n - p0 @ previous.mu_n
    _, logdet0 = np.linalg.slogdet(previous.lambda_n)
    _, logdet1 = np.linalg.slogdet(current.lambda_n)
    expo = (
        h @ previous.gamma @ h
        + previous.mu_n @ p0 @ previous.mu_n
        - current.mu_n @ p1 @ current.mu_n
    )
    return math.exp(0.5 * (logdet0 - logdet1 + expo))


def _t_log_const(law: MarginalLaw) -> float:
    nu, r = law.dof, law.r
    return (
        math.lgamma(0.5 * (nu + r)) - math.lgamma(0.5 * nu)
        - 0.5 * r * math.log(nu * math.pi) - 0.5 * law.chol.logdet()
    )


def _t_lr_sup(num: MarginalLaw, den: MarginalLaw, rng, n_starts) -> float:
    nu1, nu0, r = num.dof, den.dof, num.r
    if nu1 < nu0:
        return math.inf
    p1 = spd_inverse(num.chol)
    p0 = spd_inverse(den.chol)
    k1 = 0.5 * (nu1 + r)
    k0 = 0.5 * (nu0 + r)
    const = _t_log_const(num) - _t_log_const(den)

    def neg_log_lr(y):
        d1 = y - num.loc
        d0 = y - den.loc
        q1 = d1 @ p1 @ d1
        q0 = d0 @ p0 @ d0
        val = const - k1 * math.log1p(q1 / nu1) + k0 * math.log1p(q0 / nu0)
        grad = -2.0 * k1 * (p1 @ d1) / (nu1 + q1) + 2.0 * k0 * (p0 @ d0) / (nu0 + q0)
        return -val, -grad

    best = -math.inf
    if nu1 == nu0:
        # equal tails: the ratio tends to a finite limit along each ray
        w = np.linalg.eigvals(np.linalg.solve(p1, p0)).real
        best = const + k0 * math.log(float(np.max(w)))
    starts = [num.loc, den.loc, 0.5 * (num.loc + den.loc)]
    rng = rng or RngStream(0, ("lr_supremum",))
    while len(starts) < n_starts:
        starts.append(num.sample(rng.substream(len(starts))))
    for y0 in starts:
        y0 = np.asarray(y0, dtype=np.float64)
        res = minimize(neg_log_lr, y0, jac=True, method="BFGS")
        best = max(best, -float(res.fun), -neg_log_lr(y0)[0])
    return LR_SAFETY * math.exp(best)
