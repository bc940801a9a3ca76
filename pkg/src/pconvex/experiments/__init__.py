"""Experiment harness: design generation, noisy oracles and the sequential driver."""

from .ambulance import CallStream, ambulance_replication, call_density
from .design import ambulance_line_count, generate_design_points
from .driver import (
    ConfigError,
    DesignConfig,
    ExperimentConfig,
    ObservationLog,
    ReusePolicy,
    RunContext,
    RunFailure,
    build_design,
    build_oracle,
    load_checkpoint,
    read_observations,
    run_sequential,
    state_from_dict,
    state_to_dict,
    write_checkpoint,
)
from .oracles import TRUTH_FUNCTIONS, AmbulanceOracle, CovarianceSpec, SyntheticOracle


def sample_observation(oracle, rng):
    """One observation vector from ``oracle`` (truth plus noise, or one simulation per point)."""
    return oracle.sample(rng)


__all__ = [
    "AmbulanceOracle",
    "CallStream",
    "ConfigError",
    "CovarianceSpec",
    "DesignConfig",
    "ExperimentConfig",
    "ObservationLog",
    "ReusePolicy",
    "RunContext",
    "RunFailure",
    "SyntheticOracle",
    "TRUTH_FUNCTIONS",
    "ambulance_line_count",
    "ambulance_replication",
    "build_design",
    "build_oracle",
    "call_density",
    "generate_design_points",
    "load_checkpoint",
    "read_observations",
    "run_sequential",
    "sample_observation",
    "state_from_dict",
    "state_to_dict",
    "write_checkpoint",
]
