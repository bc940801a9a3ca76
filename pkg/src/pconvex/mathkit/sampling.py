"""Samplers for Gaussian, multivariate t, Wishart and uniform-direction draws."""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .linalg import CholFactor
from .rng import RngStream


def _lower(chol) -> NDArray[np.float64]:
    return chol.lower if isinstance(chol, CholFactor) else np.atleast_2d(np.asarray(chol, dtype=np.float64))


def sample_std_normal_vec(rng: RngStream, dim: int) -> NDArray[np.float64]:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return rng.standard_normal(dim)


def sample_mvn(rng: RngStream, mean: ArrayLike, cov_chol) -> NDArray[np.float64]:
    """Draw ``mean + L z`` with ``z`` standard normal."""
    mean = np.asarray(mean, dtype=np.float64)
    lower = _lower(cov_chol)
    if lower.shape != (mean.size, mean.size):
        raise ValueError("dimension mismatch between mean and covariance factor")
    return mean + lower @ rng.standard_normal(mean.size)


def sample_mvt(rng: RngStream, dof: float, loc: ArrayLike, scale_chol) -> NDArray[np.float64]:
    """Multivariate Student-t draw ``loc + L z sqrt(dof / y)``, ``y ~ chi2(dof)``."""
    if dof <= 0:
        raise ValueError("dof must be positive")
    loc = np.asarray(loc, dtype=np.float64)
    lower = _lower(scale_chol)
    if lower.shape != (loc.size, loc.size):
        raise ValueError("dimension mismatch between location and scale factor")
    z = rng.standard_normal(loc.size)
    y = rng.chisquare(dof)
    return loc + (lower @ z) * np.sqrt(dof / y)


def sample_wishart(rng: RngStream, dof: int, scale_chol) -> NDArray[np.float64]:
    """Wishart draw as a sum of ``dof`` outer products of ``N(0, scale)`` vectors."""
    lower = _lower(scale_chol)
    dim = lower.shape[0]
    if int(dof) != dof or dof < dim:
        raise ValueError(f"integer dof >= dim required (dof={dof}, dim={dim})")
    w = rng.standard_normal((int(dof), dim)) @ lower.T
    out = w.T @ w
    return 0.5 * (out + out.T)


def sample_sphere_direction(rng: RngStream, dim: int) -> NDArray[np.float64]:
    """Uniform unit vector: a standard normal draw, normalized."""
    while True:
        z = rng.standard_normal(dim)
        norm = np.linalg.norm(z)
        if norm > 0.0:
            return z / norm
