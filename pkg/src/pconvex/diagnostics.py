"""Heavy-tail diagnostics for the one-step likelihood-ratio bound.

For a scalar known-variance model the log of the bound ``c`` between the
posteriors before and after one observation is

    ln c = 0.5 ln(1 + lambda_n / gamma) + 0.5 (mu_{n+1} - mu_n)^2 / (lambda_n - lambda_{n+1}).

With the truth ``f`` fixed and ``y ~ N(f, gamma)``, the quantity
``2 (ln c - shift) (gamma + lambda_n) / gamma`` is noncentral chi-square
with one degree of freedom and noncentrality ``(f - mu_n)^2 / gamma``.
:func:`lr_bound_diagnostic` simulates it and reports a QQ slope against
that law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .mathkit import RngStream
from .posterior import ar_constant_known, init_known, update_known


@dataclass(frozen=True)
class LrDiagnostic:
    n: int
    reps: int
    gamma: float
    lambda_n: float
    mu_n: float
    shift: float
    scale: float
    noncentrality: float
    qq_slope: float
    log_bounds: np.ndarray

    def summary(self) -> dict:
        return {
            "n": self.n, "reps": self.reps, "gamma": self.gamma, "lambda_n": self.lambda_n,
            "mu_n": self.mu_n, "shift": self.shift, "scale": self.scale,
            "noncentrality": self.noncentrality, "qq_slope": self.qq_slope,
            "log_bound_mean": float(np.mean(self.log_bounds)),
            "log_bound_max": float(np.max(self.log_bounds)),
        }


def lr_bound_diagnostic(gamma: float, n: int, reps: int, rng: RngStream,
                        truth: float = 0.0) -> LrDiagnostic:
    """Simulate ``ln c`` for ``reps`` next observations after ``n`` updates.

    The history of ``n`` observations is drawn once from ``rng.substream("history")``;
    replication ``k`` draws its next observation from ``rng.substream(k)``.
    """
    if gamma <= 0 or n < 0 or reps < 2:
        raise ValueError("need gamma > 0, n >= 0 and reps >= 2")
    g = np.array([[float(gamma)]])
    state = init_known(g)
    hist = rng.substream("history")
    for j in range(n):
        state = update_known(state, truth + math.sqrt(gamma) * hist.substream(j).standard_normal(1))
    lam = float(state.lambda_n[0, 0])
    mu = float(state.mu_n[0])
    logs = np.empty(reps)
    for k in range(reps):
        y = truth + math.sqrt(gamma) * rng.substream(k).standard_normal(1)
        logs[k] = math.log(ar_constant_known(state, update_known(state, y)))
    shift = 0.5 * math.log1p(lam / gamma)
    scale = 0.5 * gamma / (gamma + lam)
    nc = (truth - mu) ** 2 / gamma
    stat = np.sort((logs - shift) / scale)
    probs = (np.arange(1, reps + 1) - 0.5) / reps
    theo = stats.ncx2.ppf(probs, 1, nc) if nc > 0 else stats.chi2.ppf(probs, 1)
    slope = float(np.dot(theo, stat) / np.dot(theo, theo))
    return LrDiagnostic(n, reps, float(gamma), lam, mu, shift, scale, nc, slope, logs)
