"""Bayesian sequential testing of whether noisy function values are convex.

Noisy observations at fixed design points update a conjugate posterior on
the function values; Monte Carlo estimators then approximate the posterior
probability that the values are interpolated by some convex function.

Subpackages
-----------
mathkit
    SPD linear algebra, special functions, random streams and samplers.
lp
    Dense two-phase simplex with a compiled kernel and a Python fallback.
experiments
    Design points, noisy oracles (synthetic and ambulance) and the driver.
"""

from .cone import DesignSet, StepInterval, is_convex_vector, oracle_convex_1d, step_interval
from .estimators import (
    EfficiencyRecord,
    EstimateReport,
    SampleCache,
    acceptance_rejection,
    change_of_measure,
    conditional_mc,
    efficiency,
    f_t_given_z,
    vanilla_mc,
)
from .lp import BACKEND as LP_BACKEND
from .mathkit import RngStream
from .posterior import (
    KnownVarPosterior,
    MarginalLaw,
    NiwPosterior,
    init_jeffreys,
    init_known,
    likelihood_ratio,
    lr_supremum,
    marginal,
    update_known,
    update_niw,
)

__version__ = "0.1.0"

__all__ = [
    "DesignSet",
    "EfficiencyRecord",
    "EstimateReport",
    "KnownVarPosterior",
    "LP_BACKEND",
    "MarginalLaw",
    "NiwPosterior",
    "RngStream",
    "SampleCache",
    "StepInterval",
    "acceptance_rejection",
    "change_of_measure",
    "conditional_mc",
    "efficiency",
    "f_t_given_z",
    "init_jeffreys",
    "init_known",
    "is_convex_vector",
    "likelihood_ratio",
    "lr_supremum",
    "marginal",
    "oracle_convex_1d",
    "step_interval",
    "update_known",
    "update_niw",
    "vanilla_mc",
]
