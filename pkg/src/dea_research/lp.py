"""Dense two-phase simplex solver for small linear programs.

Problems are stated as ``min|max c.x`` subject to rows ``a.x (<=|>=|=) b`` and
``x >= 0``. The solver uses Bland's rule for both entering and leaving
variables, so results are deterministic and the method terminates on
degenerate problems.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import MalformedProblem


class Sense(str, enum.Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class Relation(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "="


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    ITERATION_LIMIT = "IterationLimit"


@dataclass(frozen=True)
class Constraint:
    coefficients: tuple[float, ...]
    relation: Relation
    rhs: float


@dataclass(frozen=True)
class LinearProgram:
    """A linear program over nonnegative variables.

    Construct with :meth:`build` to get validation and coercion of plain
    sequences; the invariants (equal row lengths, finite values, at least
    one variable and one constraint) are checked in ``__post_init__``.
    """

    sense: Sense
    objective: tuple[float, ...]
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        n = len(self.objective)
        if n < 1:
            raise MalformedProblem("objective must have at least one coefficient")
        if len(self.constraints) < 1:
            raise MalformedProblem("at least one constraint is required")
        if not all(math.isfinite(v) for v in self.objective):
            raise MalformedProblem("objective has non-finite coefficients")
        for i, con in enumerate(self.constraints):
            if len(con.coefficients) != n:
                raise MalformedProblem(
                    f"constraint {i} has {len(con.coefficients)} coefficients, expected {n}"
                )
            if not all(math.isfinite(v) for v in con.coefficients) or not math.isfinite(con.rhs):
                raise MalformedProblem(f"constraint {i} has non-finite values")

    @classmethod
    def build(
        cls,
        sense: Sense | str,
        objective: Sequence[float],
        constraints: Sequence[tuple[Sequence[float], Relation | str, float]],
    ) -> LinearProgram:
        try:
            sense = Sense(sense)
            rows = tuple(
                Constraint(tuple(float(a) for a in coef), Relation(rel), float(rhs))
                for coef, rel, rhs in constraints
            )
            obj = tuple(float(c) for c in objective)
        except (TypeError, ValueError) as exc:
            raise MalformedProblem(str(exc)) from exc
        return cls(sense, obj, rows)

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    def matrix(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(c, A, b)`` as float arrays."""
        A = np.array([con.coefficients for con in self.constraints], dtype=float)
        b = np.array([con.rhs for con in self.constraints], dtype=float)
        return np.array(self.objective, dtype=float), A, b


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = 1e-7
    pivot_tol: float = 1e-9
    optimality_tol: float = 1e-9
    duality_gap_tol: float = 1e-7
    max_iterations: int = 10_000
    backend: str | None = None  # "numba" | "numpy"; None -> DEA_RESEARCH_KERNEL


DEFAULT_OPTIONS = SolverOptions()


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray
    objective_value: float
    dual_values: np.ndarray
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


@dataclass
class FeasibilityReport:
    max_constraint_violation: float
    max_bound_violation: float
    duality_gap: float
    dual_objective: float
    violations: list[int] = field(default_factory=list)

    def ok(self, options: SolverOptions = DEFAULT_OPTIONS) -> bool:
        return (
            self.max_constraint_violation <= options.feasibility_tol
            and self.max_bound_violation <= options.feasibility_tol
            and self.duality_gap <= options.duality_gap_tol
        )


def _standard_form(problem: LinearProgram):
    """Flip rows to nonnegative rhs and append slack/surplus/artificial columns.

    Returns the initial tableau with a zero objective row, the basis, the
    number of non-artificial columns, the row sign flips, and for each row
    the column of its initial identity (slack or artificial) variable.
    """
    c, A, b = problem.matrix()
    m, n = A.shape
    rel = [con.relation for con in problem.constraints]
    flip = np.where(b < 0, -1.0, 1.0)
    A = A * flip[:, None]
    b = b * flip
    rel = [
        r if f > 0 else {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(r, r)
        for r, f in zip(rel, flip)
    ]
    n_slack = sum(r is not Relation.EQ for r in rel)
    n_art = sum(r is not Relation.LE for r in rel)
    n_real = n + n_slack
    T = np.zeros((m + 1, n_real + n_art + 1))
    T[:m, :n] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=np.int64)
    unit_col = np.empty(m, dtype=np.int64)
    s = n
    a = n_real
    for i, r in enumerate(rel):
        if r is Relation.LE:
            T[i, s] = 1.0
            basis[i] = unit_col[i] = s
            s += 1
        elif r is Relation.GE:
            T[i, s] = -1.0
            s += 1
            T[i, a] = 1.0
            basis[i] = unit_col[i] = a
            a += 1
        else:
            T[i, a] = 1.0
            basis[i] = unit_col[i] = a
            a += 1
    return T, basis, n_real, flip, unit_col


def _drive_out_artificials(T, basis, n_real, pivot_tol):
    m = T.shape[0] - 1
    for r in range(m):
        if basis[r] < n_real:
            continue
        cols = np.flatnonzero(np.abs(T[r, :n_real]) > pivot_tol)
        if cols.size == 0:
            continue  # redundant row; its artificial stays basic at zero
        e = cols[0]
        T[r] /= T[r, e]
        factors = T[:, e].copy()
        factors[r] = 0.0
        T -= np.outer(factors, T[r])
        basis[r] = e


def solve_lp(problem: LinearProgram, options: SolverOptions = DEFAULT_OPTIONS) -> LpSolution:
    """Solve ``problem`` with the two-phase simplex method.

    Non-optimal terminations (infeasible, unbounded, iteration cap) are
    reported through ``status``; only malformed input raises.
    """
    if not isinstance(problem, LinearProgram):
        raise MalformedProblem(f"expected LinearProgram, got {type(problem).__name__}")
    kernel = _kernels.get_kernel(options.backend)
    c, _, b = problem.matrix()
    n = problem.n_vars
    m = len(problem.constraints)
    cost = c if problem.sense is Sense.MINIMIZE else -c

    T, basis, n_real, flip, unit_col = _standard_form(problem)
    total_cols = T.shape[1] - 1
    iterations = 0

    # phase 1: minimise the sum of artificials
    if total_cols > n_real:
        art_rows = basis >= n_real
        T[m, :n_real] = -T[:m, :n_real][art_rows].sum(axis=0)
        T[m, -1] = -T[:m, -1][art_rows].sum()
        status, it = kernel(
            T, basis, n_real, options.pivot_tol, options.optimality_tol, options.max_iterations
        )
        iterations += it
        if status == _kernels.ITERATION_LIMIT:
            return _failed(Status.ITERATION_LIMIT, n, m, iterations)
        scale = max(1.0, float(np.abs(b).max()))
        if -T[m, -1] > options.feasibility_tol * scale:
            return _failed(Status.INFEASIBLE, n, m, iterations)
        _drive_out_artificials(T, basis, n_real, options.pivot_tol)

    # phase 2
    full_cost = np.zeros(total_cols)
    full_cost[:n] = cost
    T[m, :-1] = full_cost
    T[m, -1] = 0.0
    for i in range(m):
        if full_cost[basis[i]] != 0.0:
            T[m] -= full_cost[basis[i]] * T[i]
    status, it = kernel(
        T,
        basis,
        n_real,
        options.pivot_tol,
        options.optimality_tol,
        max(options.max_iterations - iterations, 0),
    )
    iterations += it
    if status == _kernels.ITERATION_LIMIT:
        return _failed(Status.ITERATION_LIMIT, n, m, iterations)
    if status == _kernels.UNBOUNDED:
        return _failed(Status.UNBOUNDED, n, m, iterations)

    x = np.zeros(total_cols)
    x[basis] = T[:m, -1]
    x = x[:n].copy()
    # reduced cost of a row's identity column is -y_i for the minimisation form
    y = -T[m, unit_col] * flip
    if problem.sense is Sense.MAXIMIZE:
        y = -y
    return LpSolution(Status.OPTIMAL, x, float(c @ x), y, iterations)


def _failed(status: Status, n: int, m: int, iterations: int) -> LpSolution:
    return LpSolution(status, np.full(n, np.nan), math.nan, np.full(m, np.nan), iterations)


def verify_solution(problem: LinearProgram, solution: LpSolution) -> FeasibilityReport:
    """Measure primal feasibility and the primal/dual objective gap of ``solution``.

    ``violations`` lists the indices of constraints violated by more than
    the default feasibility tolerance.
    """
    c, A, b = problem.matrix()
    x = np.asarray(solution.x, dtype=float)
    lhs = A @ x
    viol = np.zeros(len(b))
    for i, con in enumerate(problem.constraints):
        if con.relation is Relation.LE:
            viol[i] = max(lhs[i] - b[i], 0.0)
        elif con.relation is Relation.GE:
            viol[i] = max(b[i] - lhs[i], 0.0)
        else:
            viol[i] = abs(lhs[i] - b[i])
    bound = float(max(0.0, -x.min())) if x.size else 0.0
    dual_obj = float(b @ solution.dual_values)
    gap = abs(float(c @ x) - dual_obj)
    tol = DEFAULT_OPTIONS.feasibility_tol
    return FeasibilityReport(
        max_constraint_violation=float(viol.max()),
        max_bound_violation=bound,
        duality_gap=gap,
        dual_objective=dual_obj,
        violations=[int(i) for i in np.flatnonzero(viol > tol)],
    )
