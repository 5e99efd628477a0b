"""Input-oriented, constant-returns-to-scale DEA for technical and cost efficiency.

For a target unit ``o`` the technical score solves the envelopment LP::

    min theta
    s.t. sum_j lambda_j x_ij <= theta x_io     (each input i)
         sum_j lambda_j y_rj >= y_ro           (each output r)
         lambda >= 0

and the cost score solves::

    min w.x
    s.t. sum_j lambda_j x_ij <= x_i,  sum_j lambda_j y_rj >= y_ro,  x, lambda >= 0

with ``ce = w.x* / w.x_o`` and allocative efficiency ``ae = ce / te``. The
reference set ``j`` runs over evaluated units only: units below the staff
threshold and units with no output are flagged and kept off the frontier.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DegenerateZeroOutput,
    DomainError,
    MalformedPanel,
    NonpositiveActualCost,
    NotEligible,
    PanelEmpty,
    SolverFailure,
)
from .lp import DEFAULT_OPTIONS, LinearProgram, Relation, Sense, SolverOptions, solve_lp, verify_solution

INPUT_NAMES = ("fp", "ap", "rf")
OUTPUT_NAMES = ("pu", "pc", "ss")

DEFAULT_STAFF_THRESHOLD = 5.0
SCORE_TOL = 1e-9
PEER_TOL = 1e-9


class InputBundle(NamedTuple):
    fp: float
    ap: float
    rf: float

    @property
    def total(self) -> float:
        return self.fp + self.ap + self.rf


class OutputBundle(NamedTuple):
    pu: float
    pc: float
    ss: float


@dataclass(frozen=True)
class CostVector:
    """Relative wage weights of full, associate and assistant professors."""

    w_fp: float = 1.814
    w_ap: float = 1.370
    w_rf: float = 1.000

    def __post_init__(self):
        for name in ("w_fp", "w_ap", "w_rf"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"cost weight {name} must be positive, got {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.w_fp, self.w_ap, self.w_rf])

    def scaled(self, k: float) -> CostVector:
        return CostVector(self.w_fp * k, self.w_ap * k, self.w_rf * k)


class DmuStatus(str, enum.Enum):
    EVALUATED = "Evaluated"
    EXCLUDED_SMALL = "ExcludedSmall"
    DEGENERATE_ZERO_OUTPUT = "DegenerateZeroOutput"


def natural_key(value: str):
    """Sort key that orders ``"U2"`` before ``"U10"``."""
    return tuple(
        (0, int(part), "") if part.isdigit() else (1, 0, part)
        for part in re.split(r"(\d+)", str(value))
        if part
    )


@dataclass(frozen=True, eq=False)
class DmuPanel:
    """Inputs (FP, AP, RF) and outputs (PU, PC, SS) of the units in one disciplinary area."""

    uda: int
    dmu_ids: tuple[str, ...]
    inputs: np.ndarray
    outputs: np.ndarray
    min_staff_threshold: float = DEFAULT_STAFF_THRESHOLD

    def __post_init__(self):
        ids = tuple(str(d) for d in self.dmu_ids)
        object.__setattr__(self, "dmu_ids", ids)
        X = np.array(self.inputs, dtype=float, copy=True).reshape(len(ids), -1) if ids else np.zeros((0, 3))
        Y = np.array(self.outputs, dtype=float, copy=True).reshape(len(ids), -1) if ids else np.zeros((0, 3))
        if len(set(ids)) != len(ids):
            raise MalformedPanel(f"duplicate dmu ids in panel for UDA {self.uda}")
        if X.shape != (len(ids), 3) or Y.shape != (len(ids), 3):
            raise MalformedPanel("panel needs 3 inputs and 3 outputs per DMU")
        if not (np.isfinite(X).all() and np.isfinite(Y).all()):
            raise MalformedPanel("panel contains non-finite values")
        if (X < 0).any() or (Y < 0).any():
            raise MalformedPanel("panel values must be nonnegative")
        if not (math.isfinite(self.min_staff_threshold) and self.min_staff_threshold >= 0):
            raise MalformedPanel("staff threshold must be a nonnegative number")
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "inputs", X)
        object.__setattr__(self, "outputs", Y)

    @classmethod
    def from_bundles(
        cls,
        uda: int,
        dmus: Iterable[tuple[str, Sequence[float], Sequence[float]]],
        min_staff_threshold: float = DEFAULT_STAFF_THRESHOLD,
    ) -> DmuPanel:
        rows = list(dmus)
        return cls(
            uda,
            tuple(r[0] for r in rows),
            np.array([list(r[1]) for r in rows], dtype=float).reshape(len(rows), 3),
            np.array([list(r[2]) for r in rows], dtype=float).reshape(len(rows), 3),
            min_staff_threshold,
        )

    def __len__(self) -> int:
        return len(self.dmu_ids)

    def index(self, dmu_id: str) -> int:
        try:
            return self.dmu_ids.index(str(dmu_id))
        except ValueError:
            raise KeyError(f"unknown DMU {dmu_id!r} in UDA {self.uda}") from None

    def input_bundle(self, dmu_id: str) -> InputBundle:
        return InputBundle(*map(float, self.inputs[self.index(dmu_id)]))

    def output_bundle(self, dmu_id: str) -> OutputBundle:
        return OutputBundle(*map(float, self.outputs[self.index(dmu_id)]))

    def with_threshold(self, threshold: float) -> DmuPanel:
        return DmuPanel(self.uda, self.dmu_ids, self.inputs, self.outputs, threshold)

    def statuses(self) -> list[DmuStatus]:
        staff = self.inputs.sum(axis=1)
        out = []
        for s, y in zip(staff, self.outputs):
            if s <= 0 or s < self.min_staff_threshold:
                out.append(DmuStatus.EXCLUDED_SMALL)
            elif not (y > 0).any():
                out.append(DmuStatus.DEGENERATE_ZERO_OUTPUT)
            else:
                out.append(DmuStatus.EVALUATED)
        return out

    def frontier_indices(self) -> np.ndarray:
        return np.array(
            [i for i, s in enumerate(self.statuses()) if s is DmuStatus.EVALUATED], dtype=int
        )


@dataclass
class EfficiencyRecord:
    dmu_id: str
    status: DmuStatus
    te: float | None = None
    ae: float | None = None
    ce: float | None = None
    lambdas: dict[str, float] = field(default_factory=dict)
    min_cost_inputs: tuple[float, float, float] | None = None

    @property
    def evaluated(self) -> bool:
        return self.status is DmuStatus.EVALUATED

    def to_dict(self) -> dict:
        return {
            "dmu_id": self.dmu_id,
            "status": self.status.value,
            "te": self.te,
            "ae": self.ae,
            "ce": self.ce,
            "lambdas": dict(self.lambdas),
            "min_cost_inputs": list(self.min_cost_inputs) if self.min_cost_inputs else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EfficiencyRecord:
        mci = d.get("min_cost_inputs")
        return cls(
            dmu_id=d["dmu_id"],
            status=DmuStatus(d["status"]),
            te=d.get("te"),
            ae=d.get("ae"),
            ce=d.get("ce"),
            lambdas={str(k): float(v) for k, v in (d.get("lambdas") or {}).items()},
            min_cost_inputs=tuple(mci) if mci else None,
        )


def _check_target(panel: DmuPanel, target: str) -> tuple[int, np.ndarray]:
    o = panel.index(target)
    status = panel.statuses()[o]
    if status is DmuStatus.EXCLUDED_SMALL:
        raise NotEligible(
            f"DMU {target!r} has {panel.inputs[o].sum():g} staff, below threshold "
            f"{panel.min_staff_threshold:g}"
        )
    if status is DmuStatus.DEGENERATE_ZERO_OUTPUT:
        raise DegenerateZeroOutput(f"DMU {target!r} has no positive output")
    ref = panel.frontier_indices()
    if ref.size == 0:
        raise PanelEmpty(f"no eligible DMUs in UDA {panel.uda}")
    return o, ref


def _solve_checked(lp: LinearProgram, options: SolverOptions, what: str):
    sol = solve_lp(lp, options)
    if not sol.optimal:
        raise SolverFailure(f"{what}: LP ended with status {sol.status.value}")
    report = verify_solution(lp, sol)
    if not report.ok(options):
        raise SolverFailure(f"{what}: post-solve check failed ({report})")
    return sol


def _peer_weights(panel: DmuPanel, ref: np.ndarray, lam: np.ndarray) -> dict[str, float]:
    return {panel.dmu_ids[j]: float(v) for j, v in zip(ref, lam) if v > 0.0}


def technical_efficiency(
    panel: DmuPanel, target: str, options: SolverOptions = DEFAULT_OPTIONS
) -> EfficiencyRecord:
    """Radial input-oriented CRS efficiency of ``target`` against the panel frontier."""
    o, ref = _check_target(panel, target)
    X = panel.inputs[ref]
    Y = panel.outputs[ref]
    x_o = panel.inputs[o]
    y_o = panel.outputs[o]
    k = len(ref)
    objective = [1.0] + [0.0] * k
    rows = []
    for i in range(X.shape[1]):
        rows.append(([-x_o[i], *X[:, i]], Relation.LE, 0.0))
    for r in range(Y.shape[1]):
        rows.append(([0.0, *Y[:, r]], Relation.GE, y_o[r]))
    lp = LinearProgram.build(Sense.MINIMIZE, objective, rows)
    sol = _solve_checked(lp, options, f"technical efficiency of {target!r}")
    te = float(sol.x[0])
    if not 0.0 < te <= 1.0 + SCORE_TOL:
        raise SolverFailure(f"technical efficiency of {target!r} out of range: {te}")
    return EfficiencyRecord(
        dmu_id=panel.dmu_ids[o],
        status=DmuStatus.EVALUATED,
        te=min(te, 1.0),
        lambdas=_peer_weights(panel, ref, sol.x[1:]),
    )


def cost_efficiency(
    panel: DmuPanel,
    target: str,
    costs: CostVector = CostVector(),
    options: SolverOptions = DEFAULT_OPTIONS,
) -> EfficiencyRecord:
    """Ratio of minimum attainable cost to actual cost for ``target``.

    ``lambdas`` on the returned record are the cost-minimising peer weights;
    ``min_cost_inputs`` is the cost-minimising input bundle.
    """
    o, ref = _check_target(panel, target)
    w = costs.as_array()
    actual = float(w @ panel.inputs[o])
    if actual <= 0:
        raise NonpositiveActualCost(f"DMU {target!r} has zero actual cost")
    X = panel.inputs[ref]
    Y = panel.outputs[ref]
    y_o = panel.outputs[o]
    k = len(ref)
    n_in = X.shape[1]
    objective = [*w, *([0.0] * k)]
    rows = []
    for i in range(n_in):
        unit = [0.0] * n_in
        unit[i] = -1.0
        rows.append(([*unit, *X[:, i]], Relation.LE, 0.0))
    for r in range(Y.shape[1]):
        rows.append(([0.0] * n_in + list(Y[:, r]), Relation.GE, y_o[r]))
    lp = LinearProgram.build(Sense.MINIMIZE, objective, rows)
    sol = _solve_checked(lp, options, f"cost efficiency of {target!r}")
    ce = sol.objective_value / actual
    if not 0.0 < ce <= 1.0 + SCORE_TOL:
        raise SolverFailure(f"cost efficiency of {target!r} out of range: {ce}")
    return EfficiencyRecord(
        dmu_id=panel.dmu_ids[o],
        status=DmuStatus.EVALUATED,
        ce=min(ce, 1.0),
        lambdas=_peer_weights(panel, ref, sol.x[n_in:]),
        min_cost_inputs=tuple(float(v) for v in sol.x[:n_in]),
    )


def allocative_efficiency(te: float, ce: float) -> float:
    if not (0.0 < ce and 0.0 < te and ce <= te + SCORE_TOL and te <= 1.0 + SCORE_TOL):
        raise DomainError(f"need 0 < ce <= te <= 1, got te={te}, ce={ce}")
    return min(ce / te, 1.0)


def evaluate_panel(
    panel: DmuPanel,
    costs: CostVector = CostVector(),
    options: SolverOptions = DEFAULT_OPTIONS,
) -> list[EfficiencyRecord]:
    """Score every unit of ``panel``; flagged units carry a status and no scores.

    Records come back sorted by ``dmu_id`` (natural order).
    """
    statuses = panel.statuses()
    if DmuStatus.EVALUATED not in statuses:
        raise PanelEmpty(f"no eligible DMUs in UDA {panel.uda} after exclusions")
    records = []
    for dmu_id, status in zip(panel.dmu_ids, statuses):
        if status is not DmuStatus.EVALUATED:
            records.append(EfficiencyRecord(dmu_id, status))
            continue
        tech = technical_efficiency(panel, dmu_id, options)
        cost = cost_efficiency(panel, dmu_id, costs, options)
        if cost.ce > tech.te + SCORE_TOL:
            raise SolverFailure(f"DMU {dmu_id!r}: ce {cost.ce} exceeds te {tech.te}")
        ce = min(cost.ce, tech.te)
        tech.ce = ce
        tech.ae = allocative_efficiency(tech.te, ce)
        tech.min_cost_inputs = cost.min_cost_inputs
        records.append(tech)
    records.sort(key=lambda r: natural_key(r.dmu_id))
    return records


def frontier_peers(record: EfficiencyRecord) -> list[tuple[str, float]]:
    if not record.evaluated:
        raise DomainError(f"DMU {record.dmu_id!r} is {record.status.value}; it has no peers")
    peers = [(d, w) for d, w in record.lambdas.items() if w > PEER_TOL]
    return sorted(peers, key=lambda p: (-p[1], natural_key(p[0])))
