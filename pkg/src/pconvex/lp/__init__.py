"""Small dense linear programs: two-phase simplex with compiled and Python kernels.

The compiled kernel is used when the extension module is importable; set
``PCONVEX_LP_BACKEND=python`` to force the pure-Python fallback.
"""

from .core import (
    BACKEND,
    KERNELS,
    HighsSolver,
    LpNumericalError,
    LpOutcome,
    LpProblem,
    LpSolver,
    LpStatus,
    SimplexSolver,
    default_solver,
    feasible,
    solve,
)

__all__ = [
    "BACKEND",
    "KERNELS",
    "HighsSolver",
    "LpNumericalError",
    "LpOutcome",
    "LpProblem",
    "LpSolver",
    "LpStatus",
    "SimplexSolver",
    "default_solver",
    "feasible",
    "solve",
]
