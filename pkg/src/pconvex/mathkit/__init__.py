"""Numerical building blocks: SPD algebra, special functions, random streams."""

from .linalg import (
    CholFactor,
    NotPositiveDefinite,
    cholesky,
    spd_inverse,
    spd_inverse_update,
    spd_solve,
    smw_update,
)
from .rng import RngStream
from .sampling import (
    sample_mvn,
    sample_mvt,
    sample_sphere_direction,
    sample_std_normal_vec,
    sample_wishart,
)
from .special import betainc, chi2_cdf, f_cdf, gammainc_lower

__all__ = [
    "CholFactor",
    "NotPositiveDefinite",
    "RngStream",
    "betainc",
    "chi2_cdf",
    "cholesky",
    "f_cdf",
    "gammainc_lower",
    "sample_mvn",
    "sample_mvt",
    "sample_sphere_direction",
    "sample_std_normal_vec",
    "sample_wishart",
    "spd_inverse",
    "spd_inverse_update",
    "spd_solve",
    "smw_update",
]
