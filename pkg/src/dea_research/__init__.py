"""Technical, allocative and cost efficiency of research units via DEA on bibliometric data."""

__version__ = "0.1.0"

from .dea import (  # noqa: E402
    CostVector,
    DmuPanel,
    DmuStatus,
    EfficiencyRecord,
    allocative_efficiency,
    cost_efficiency,
    evaluate_panel,
    frontier_peers,
    technical_efficiency,
)
from .lp import LinearProgram, LpSolution, SolverOptions, Status, solve_lp, verify_solution  # noqa: E402

__all__ = [
    "CostVector",
    "DmuPanel",
    "DmuStatus",
    "EfficiencyRecord",
    "LinearProgram",
    "LpSolution",
    "SolverOptions",
    "Status",
    "allocative_efficiency",
    "cost_efficiency",
    "evaluate_panel",
    "frontier_peers",
    "solve_lp",
    "technical_efficiency",
    "verify_solution",
]
