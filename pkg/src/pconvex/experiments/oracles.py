"""Noisy function oracles: synthetic test functions and the ambulance simulator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..cone import DesignSet
from ..mathkit import RngStream, cholesky
from .ambulance import CallStream, ambulance_replication

TRUTH_FUNCTIONS = {
    "sum_squares": lambda x: np.sum(x * x, axis=-1),
    "neg_sum_squares": lambda x: -np.sum(x * x, axis=-1),
    "zero": lambda x: np.zeros(x.shape[:-1]),
    "linear": lambda x: np.sum(x, axis=-1),
}


@dataclass(frozen=True)
class CovarianceSpec:
    """Sampling covariance over the design points.

    Parameters
    ----------
    diagonal : {"constant", "proportional"}
        ``constant``: ``Gamma_ii = variance``. ``proportional``:
        ``Gamma_ii = variance * f(x_i)^2``.
    variance : float
        Constant variance, or the proportionality factor.
    off_diagonal : {"zero", "gaussian_kernel"}
        Kernel off-diagonals are ``amplitude * exp(-|x_i - x_j|^2 / 2)``,
        multiplied by ``variance * f(x_i) f(x_j)`` in the proportional case.
    amplitude : float
        Kernel amplitude.
    """

    diagonal: str = "constant"
    variance: float = 0.01
    off_diagonal: str = "zero"
    amplitude: float = 0.0

    def __post_init__(self):
        if self.diagonal not in ("constant", "proportional"):
            raise ValueError(f"unknown diagonal rule {self.diagonal!r}")
        if self.off_diagonal not in ("zero", "gaussian_kernel"):
            raise ValueError(f"unknown off-diagonal rule {self.off_diagonal!r}")
        if self.variance < 0 or self.amplitude < 0:
            raise ValueError("variance and amplitude must be nonnegative")

    def matrix(self, points: NDArray, truth: NDArray) -> NDArray[np.float64]:
        points = np.atleast_2d(points)
        r = points.shape[0]
        if self.diagonal == "constant":
            diag = np.full(r, self.variance)
            unit = np.ones(r)
        else:
            diag = self.variance * truth ** 2
            unit = np.sqrt(self.variance) * truth
        gamma = np.diag(diag)
        if self.off_diagonal == "gaussian_kernel":
            sq = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
            off = self.amplitude * np.exp(-0.5 * sq) * np.outer(unit, unit)
            off[np.diag_indices(r)] = 0.0
            gamma = gamma + off
        return gamma


class SyntheticOracle:
    """Observations ``f(x) + xi`` with ``xi ~ N(0, Gamma)``.

    Noise is correlated across design points through ``Gamma`` (common
    random numbers); a given stream always yields the same noise vector.
    """

    def __init__(self, function: str, ds: DesignSet, covariance: CovarianceSpec):
        if function not in TRUTH_FUNCTIONS:
            raise ValueError(f"unknown truth function {function!r}; have {sorted(TRUTH_FUNCTIONS)}")
        self.function = function
        self.ds = ds
        self.truth = TRUTH_FUNCTIONS[function](ds.points)
        self.gamma = covariance.matrix(ds.points, self.truth)
        if np.any(self.gamma != 0.0):
            self._lower = cholesky(self.gamma).lower
        else:
            self._lower = np.zeros_like(self.gamma)

    @property
    def r(self) -> int:
        return self.ds.r

    def sample(self, rng: RngStream) -> NDArray[np.float64]:
        return self.truth + self._lower @ rng.standard_normal(self.r)


class AmbulanceOracle:
    """Mean response time at each candidate base configuration.

    Design points live in ``[0, 1]^(2 B)``: consecutive coordinate pairs are
    the base locations. One observation runs one replication per design
    point, all driven by the same call stream.
    """

    def __init__(self, n_bases: int, ds: DesignSet, n_calls: int = 360):
        if ds.d != 2 * n_bases:
            raise ValueError(f"{n_bases} bases need 2*{n_bases}-dimensional design points, got d={ds.d}")
        self.n_bases = n_bases
        self.ds = ds
        self.n_calls = n_calls

    @property
    def r(self) -> int:
        return self.ds.r

    def sample(self, rng: RngStream) -> NDArray[np.float64]:
        calls = CallStream(rng)
        return np.array([
            ambulance_replication(p.reshape(self.n_bases, 2), calls=calls, n_calls=self.n_calls)
            for p in self.ds.points
        ])
