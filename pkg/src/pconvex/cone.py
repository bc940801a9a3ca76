"""Membership in the cone of convex vectors over a fixed design set.

A vector ``g`` is convex on design points ``x_1..x_r`` when some convex
function interpolates it; equivalently, for every ``i`` there is an affine
minorant through ``(x_i, g_i)``. Eliminating the intercept, system ``i``
asks for a slope ``a`` with

    a . (x_j - x_i) <= g_j - g_i        for all j != i,

which is an inequality-only LP in ``d`` free variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .lp import LpNumericalError, LpStatus, default_solver


class DesignSet:
    """Design points ``x_1..x_r`` in ``R^d`` with the per-system geometry cached.

    Parameters
    ----------
    points : array_like, shape (r, d) or (r,)
        Design points; a 1-D array is read as ``d = 1``.
    """

    def __init__(self, points: ArrayLike):
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("points must be an (r, d) array")
        r, d = pts.shape
        if r < 2:
            raise ValueError("at least two design points are required")
        gaps = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
        gaps[np.diag_indices(r)] = np.inf
        if np.min(gaps) <= 1e-12:
            raise ValueError("design points must be pairwise distinct")
        self.points = pts
        self.points.setflags(write=False)
        self.r = r
        self.d = d
        self._others = [np.delete(np.arange(r), i) for i in range(r)]
        self._diffs = [np.ascontiguousarray(pts[o] - pts[i]) for i, o in enumerate(self._others)]

    def __len__(self) -> int:
        return self.r

    def __repr__(self) -> str:
        return f"DesignSet(r={self.r}, d={self.d})"

    def system(self, i: int, g: NDArray) -> tuple[NDArray, NDArray]:
        """Constraint block ``(A, b)`` of supporting-hyperplane system ``i``."""
        others = self._others[i]
        return self._diffs[i], g[others] - g[i]


@dataclass(frozen=True)
class StepInterval:
    """Closed interval ``[t_min, t_max]`` of step sizes; may be empty or unbounded."""

    t_min: float
    t_max: float
    empty: bool = False

    @classmethod
    def make_empty(cls) -> "StepInterval":
        return cls(math.nan, math.nan, True)

    def contains(self, t: float) -> bool:
        return not self.empty and self.t_min <= t <= self.t_max


def _check_vector(ds: DesignSet, g) -> NDArray:
    g = np.asarray(g, dtype=np.float64).ravel()
    if g.shape[0] != ds.r:
        raise ValueError(f"vector has length {g.shape[0]}, design set has {ds.r} points")
    return g


def is_convex_vector(ds: DesignSet, g: ArrayLike, solver=None) -> bool:
    """True iff every supporting-hyperplane system is feasible.

    Systems are checked in order and the scan stops at the first
    infeasible one.
    """
    g = _check_vector(ds, g)
    solver = solver or default_solver()
    for i in range(ds.r):
        A, b = ds.system(i, g)
        status, _, _ = solver.solve_arrays(A, b)
        if status is LpStatus.NUMERICAL_FAILURE:
            raise LpNumericalError(f"system {i} hit the simplex iteration cap")
        if status is not LpStatus.OPTIMAL:
            return False
    return True


def oracle_convex_1d(x: ArrayLike, g: ArrayLike, tol: float = 1e-12) -> bool:
    """Slope test for ``d = 1``: chord slopes must be nondecreasing.

    ``x`` must be strictly increasing. ``tol`` is relative to the largest
    slope magnitude and absorbs round-off for affine inputs.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    g = np.asarray(g, dtype=np.float64).ravel()
    if x.shape != g.shape:
        raise ValueError("x and g must have the same length")
    if np.any(np.diff(x) <= 0.0):
        raise ValueError("x must be strictly increasing")
    slopes = np.diff(g) / np.diff(x)
    if slopes.size < 2:
        return True
    scale = max(1.0, float(np.max(np.abs(slopes))))
    return bool(np.all(np.diff(slopes) >= -tol * scale))


def step_interval(ds: DesignSet, mu: ArrayLike, scale_dir: ArrayLike, solver=None) -> StepInterval:
    """The set ``{t : mu + t * scale_dir is convex}`` as an interval.

    For each system ``i`` the LP over ``(a, t)``

        a . (x_j - x_i) - (w_j - w_i) t <= mu_j - mu_i

    is minimized and maximized in ``t``; the section of the cone is the
    intersection of the ``r`` projected intervals. Unbounded programs give
    infinite endpoints.
    """
    mu = _check_vector(ds, mu)
    w = _check_vector(ds, scale_dir)
    solver = solver or default_solver()
    n = ds.d + 1
    c = np.zeros(n)
    c[-1] = 1.0
    lo, hi = -math.inf, math.inf
    for i in range(ds.r):
        others = ds._others[i]
        A = np.empty((ds.r - 1, n))
        A[:, :-1] = ds._diffs[i]
        A[:, -1] = -(w[others] - w[i])
        b = mu[others] - mu[i]
        for maximize in (False, True):
            status, value, _ = solver.solve_arrays(A, b, c, maximize=maximize)
            if status is LpStatus.NUMERICAL_FAILURE:
                raise LpNumericalError(f"step LP {i} hit the simplex iteration cap")
            if status is LpStatus.INFEASIBLE:
                return StepInterval.make_empty()
            if status is LpStatus.OPTIMAL:
                if maximize:
                    hi = min(hi, value)
                else:
                    lo = max(lo, value)
        if lo > hi:
            return StepInterval.make_empty()
    return StepInterval(lo, hi)
