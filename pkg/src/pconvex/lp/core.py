"""Dense LP problems over free variables, solved by a two-phase simplex."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
from numpy.typing import NDArray

from . import _simplex_py

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7


def _load_kernels() -> dict[str, Callable]:
    kernels: dict[str, Callable] = {"python": _simplex_py.solve_free}
    try:
        from ._simplex_ext import solve_free as compiled
    except ImportError:
        pass
    else:
        kernels["cython"] = compiled
    return kernels


KERNELS = _load_kernels()
_requested = os.environ.get("PCONVEX_LP_BACKEND", "").strip().lower()
if _requested and _requested not in KERNELS:
    raise ImportError(
        f"PCONVEX_LP_BACKEND={_requested!r} is not available; have {sorted(KERNELS)}"
    )
BACKEND = _requested or ("cython" if "cython" in KERNELS else "python")


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


_STATUS_CODES = {
    _simplex_py.OPTIMAL: LpStatus.OPTIMAL,
    _simplex_py.INFEASIBLE: LpStatus.INFEASIBLE,
    _simplex_py.UNBOUNDED: LpStatus.UNBOUNDED,
    _simplex_py.NUMERICAL_FAILURE: LpStatus.NUMERICAL_FAILURE,
}


class LpNumericalError(RuntimeError):
    """The simplex hit its iteration cap (cycling guard)."""


def _rows(a, n):
    a = np.asarray(a, dtype=np.float64)
    if a.size == 0:
        return np.zeros((0, n))
    return np.atleast_2d(a)


@dataclass(frozen=True)
class LpProblem:
    """``sense`` over free ``x``: ``A_eq x = b_eq``, ``A_ub x <= b_ub``.

    ``sense`` is ``"min"``, ``"max"`` or ``"feasibility"`` (objective ignored).
    """

    num_vars: int
    A_eq: NDArray[np.float64] = field(default=None)
    b_eq: NDArray[np.float64] = field(default=None)
    A_ub: NDArray[np.float64] = field(default=None)
    b_ub: NDArray[np.float64] = field(default=None)
    objective: NDArray[np.float64] | None = None
    sense: str = "feasibility"

    def __post_init__(self):
        n = self.num_vars
        set_ = object.__setattr__
        set_(self, "A_eq", _rows(self.A_eq if self.A_eq is not None else [], n))
        set_(self, "b_eq", np.asarray(self.b_eq if self.b_eq is not None else [], dtype=np.float64).ravel())
        set_(self, "A_ub", _rows(self.A_ub if self.A_ub is not None else [], n))
        set_(self, "b_ub", np.asarray(self.b_ub if self.b_ub is not None else [], dtype=np.float64).ravel())
        if self.sense not in ("min", "max", "feasibility"):
            raise ValueError(f"unknown sense {self.sense!r}")
        if self.sense != "feasibility":
            if self.objective is None:
                raise ValueError("an objective is required for min/max problems")
            set_(self, "objective", np.asarray(self.objective, dtype=np.float64).ravel())
            if self.objective.shape[0] != n:
                raise ValueError("objective length must equal num_vars")
        for name, a, b in (("eq", self.A_eq, self.b_eq), ("le", self.A_ub, self.b_ub)):
            if a.shape[1] != n or a.shape[0] != b.shape[0]:
                raise ValueError(f"{name} constraint block has shape {a.shape} with {b.shape[0]} rhs values")

    @classmethod
    def from_rows(cls, num_vars, eq=(), le=(), objective=None, sense="feasibility"):
        """Build from ``(row, rhs)`` pairs."""
        eq, le = list(eq), list(le)
        return cls(
            num_vars,
            A_eq=[r for r, _ in eq] if eq else None,
            b_eq=[b for _, b in eq] if eq else None,
            A_ub=[r for r, _ in le] if le else None,
            b_ub=[b for _, b in le] if le else None,
            objective=objective,
            sense=sense,
        )


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    value: float = float("nan")
    witness: NDArray[np.float64] | None = None
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class LpSolver(Protocol):
    def solve(self, problem: LpProblem) -> LpOutcome: ...


class SimplexSolver:
    """In-repo two-phase simplex with Bland's rule.

    Parameters
    ----------
    backend : {"cython", "python"}, optional
        Kernel to use; defaults to the module-level :data:`BACKEND`.
    """

    def __init__(self, backend: str | None = None):
        self.backend = backend or BACKEND
        self._kernel = KERNELS[self.backend]

    def solve(self, problem: LpProblem) -> LpOutcome:
        n = problem.num_vars
        phase1 = problem.sense == "feasibility"
        if phase1:
            c = np.zeros(n)
        elif problem.sense == "min":
            c = problem.objective
        else:
            c = -problem.objective
        code, x, value, pivots = self._kernel(
            problem.A_eq, problem.b_eq, problem.A_ub, problem.b_ub, c,
            phase1, PIVOT_TOL, FEAS_TOL, -1,
        )
        status = _STATUS_CODES[code]
        if status is LpStatus.OPTIMAL and problem.sense == "max":
            value = -value
        return LpOutcome(status, value, x, pivots)

    def solve_arrays(self, A_ub, b_ub, c=None, *, maximize=False):
        """Fast path for inequality-only problems; returns (status, value, x)."""
        n = A_ub.shape[1]
        empty = _EMPTY.get(n)
        if empty is None:
            empty = _EMPTY.setdefault(n, np.zeros((0, n)))
        phase1 = c is None
        cc = np.zeros(n) if phase1 else (-c if maximize else c)
        code, x, value, _ = self._kernel(empty, _NO_RHS, A_ub, b_ub, cc, phase1, PIVOT_TOL, FEAS_TOL, -1)
        status = _STATUS_CODES[code]
        if status is LpStatus.OPTIMAL and maximize:
            value = -value
        return status, value, x


_EMPTY: dict[int, NDArray] = {}
_NO_RHS = np.zeros(0)

_default = SimplexSolver()


def default_solver() -> SimplexSolver:
    return _default


def solve(problem: LpProblem, solver: LpSolver | None = None) -> LpOutcome:
    """Solve ``problem``; the iteration cap yields ``NUMERICAL_FAILURE``."""
    return (solver or _default).solve(problem)


def feasible(problem: LpProblem, solver: LpSolver | None = None) -> bool:
    """Phase-1 feasibility test.

    Raises
    ------
    LpNumericalError
        If the solver hits its iteration cap.
    """
    if problem.sense != "feasibility":
        problem = LpProblem(problem.num_vars, problem.A_eq, problem.b_eq, problem.A_ub, problem.b_ub)
    outcome = (solver or _default).solve(problem)
    if outcome.status is LpStatus.NUMERICAL_FAILURE:
        raise LpNumericalError("simplex iteration cap exceeded")
    return outcome.status is LpStatus.OPTIMAL


class HighsSolver:
    """Adapter running the same contract through SciPy's HiGHS backend."""

    backend = "highs"

    def solve(self, problem: LpProblem) -> LpOutcome:
        from scipy.optimize import linprog

        n = problem.num_vars
        if problem.sense == "feasibility":
            c = np.zeros(n)
        else:
            c = problem.objective if problem.sense == "min" else -problem.objective
        res = linprog(
            c,
            A_ub=problem.A_ub if problem.A_ub.shape[0] else None,
            b_ub=problem.b_ub if problem.b_ub.shape[0] else None,
            A_eq=problem.A_eq if problem.A_eq.shape[0] else None,
            b_eq=problem.b_eq if problem.b_eq.shape[0] else None,
            bounds=[(None, None)] * n,
            method="highs",
        )
        if res.status == 0:
            value = float(res.fun) if problem.sense != "feasibility" else 0.0
            if problem.sense == "max":
                value = -value
            return LpOutcome(LpStatus.OPTIMAL, value, np.asarray(res.x))
        if res.status == 2:
            # presolve sometimes reports unbounded programs as infeasible
            if problem.sense != "feasibility" and self.solve(
                    LpProblem(n, problem.A_eq, problem.b_eq, problem.A_ub, problem.b_ub)).optimal:
                return LpOutcome(LpStatus.UNBOUNDED)
            return LpOutcome(LpStatus.INFEASIBLE)
        if res.status == 3:
            return LpOutcome(LpStatus.UNBOUNDED)
        return LpOutcome(LpStatus.NUMERICAL_FAILURE)

    def solve_arrays(self, A_ub, b_ub, c=None, *, maximize=False):
        n = A_ub.shape[1]
        if c is None:
            problem = LpProblem(n, A_ub=A_ub, b_ub=b_ub)
        else:
            problem = LpProblem(n, A_ub=A_ub, b_ub=b_ub, objective=c, sense="max" if maximize else "min")
        out = self.solve(problem)
        return out.status, out.value, out.witness
