"""Dense SPD linear algebra: Cholesky with a single jitter retry, solves, inverses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular


class NotPositiveDefinite(np.linalg.LinAlgError):
    """Raised when a matrix cannot be Cholesky-factored even after jitter."""


@dataclass(frozen=True)
class CholFactor:
    """Lower-triangular Cholesky factor ``lower`` with ``lower @ lower.T == A``."""

    lower: NDArray[np.float64]
    jittered: bool = False

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def reconstruct(self) -> NDArray[np.float64]:
        return self.lower @ self.lower.T

    def logdet(self) -> float:
        """log-determinant of the factored matrix."""
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def _as_square(a: ArrayLike) -> NDArray[np.float64]:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return a


def _plain_cholesky(a: NDArray[np.float64]) -> NDArray[np.float64] | None:
    try:
        lower = np.linalg.cholesky(a)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(lower)) or np.any(np.diag(lower) <= 0.0):
        return None
    return lower


def cholesky(a: ArrayLike, *, jitter: float = 1e-10) -> CholFactor:
    """Factor a symmetric positive-definite matrix.

    On failure the factorization is retried once with
    ``jitter * trace(a) / dim`` added to the diagonal; posterior covariances
    shrink towards singularity as data accumulates, and this absorbs
    round-off without masking a genuinely indefinite input.

    Raises
    ------
    NotPositiveDefinite
        If the retry also fails.
    ValueError
        If ``a`` is not square or not symmetric.
    """
    a = _as_square(a)
    scale = max(float(np.max(np.abs(a))), 1e-300)
    if not np.allclose(a, a.T, rtol=1e-12, atol=1e-12 * scale):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    lower = _plain_cholesky(a)
    if lower is not None:
        return CholFactor(lower)
    dim = a.shape[0]
    bump = jitter * float(np.trace(a)) / dim
    if bump > 0.0:
        lower = _plain_cholesky(a + bump * np.eye(dim))
        if lower is not None:
            return CholFactor(lower, jittered=True)
    raise NotPositiveDefinite("matrix is not positive definite (jitter retry failed)")


def spd_solve(f: CholFactor, b: ArrayLike) -> NDArray[np.float64]:
    """Solve ``A x = b`` given the Cholesky factor of ``A``."""
    b = np.asarray(b, dtype=np.float64)
    if b.shape[0] != f.dim:
        raise ValueError(f"dimension mismatch: factor is {f.dim}, rhs is {b.shape[0]}")
    y = solve_triangular(f.lower, b, lower=True, check_finite=False)
    return solve_triangular(f.lower.T, y, lower=False, check_finite=False)


def spd_inverse(f: CholFactor) -> NDArray[np.float64]:
    inv = spd_solve(f, np.eye(f.dim))
    return 0.5 * (inv + inv.T)


def spd_inverse_update(precision: ArrayLike, increment: ArrayLike):
    """Add an SPD increment to a precision matrix and return the new pair.

    Returns ``(new_precision, new_covariance, factor)`` where ``factor`` is
    the Cholesky factor of the new precision. At the problem sizes used here
    (a hundred design points or fewer) a fresh factorization per update is
    cheap relative to the LP work done per iteration.
    """
    new_precision = np.asarray(precision, dtype=np.float64) + np.asarray(increment, dtype=np.float64)
    new_precision = 0.5 * (new_precision + new_precision.T)
    factor = cholesky(new_precision)
    return new_precision, spd_inverse(factor), factor


#: Name used for the rank-s precision update in the posterior recursions.
smw_update = spd_inverse_update
