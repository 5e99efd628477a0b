"""Indicator tables, rankings, tertile clusters and rank-variation statistics."""

from __future__ import annotations

import math
import statistics
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from .dea import (
    INPUT_NAMES,
    OUTPUT_NAMES,
    CostVector,
    DmuPanel,
    EfficiencyRecord,
    frontier_peers,
    natural_key,
)
from .errors import KeyMismatch, ZeroCost, ZeroStaff

INDICATORS = ("te", "ae", "ce", "output_per_scientist", "output_per_cost")
EFFICIENT_TOL = 1e-9
RANK_TIE_TOL = 1e-9


def partial_indicators(
    panel: DmuPanel,
    costs: CostVector = CostVector(),
    output_selector: str = "pu",
    cost_scale: float = 1.0,
    dmus: Iterable[str] | None = None,
) -> dict[str, tuple[float, float]]:
    """Output per scientist and output per cost unit for each DMU.

    ``cost_scale`` converts weighted staff units into the monetary unit the
    ratio is quoted in: with an assistant-professor wage of 50k and a
    per-100k basis, pass ``cost_scale=0.5``.
    """
    col = OUTPUT_NAMES.index(output_selector)
    w = costs.as_array()
    wanted = set(panel.dmu_ids if dmus is None else dmus)
    out = {}
    for dmu_id, x, y in zip(panel.dmu_ids, panel.inputs, panel.outputs):
        if dmu_id not in wanted:
            continue
        staff = float(x.sum())
        if staff <= 0:
            raise ZeroStaff(f"DMU {dmu_id!r} has no staff")
        cost = cost_scale * float(w @ x)
        if cost <= 0:
            raise ZeroCost(f"DMU {dmu_id!r} has zero weighted cost")
        out[dmu_id] = (float(y[col]) / staff, float(y[col]) / cost)
    return out


def rank(
    scores: Mapping[str, float], higher_is_better: bool = True, tol: float = RANK_TIE_TOL
) -> dict[str, int]:
    """Competition ("1224") ranking.

    Scores within ``tol`` of the first score of a tie group share that
    group's rank.
    """
    sign = -1.0 if higher_is_better else 1.0
    order = sorted(scores, key=lambda k: (sign * scores[k], natural_key(k)))
    ranks: dict[str, int] = {}
    head = None
    for pos, key in enumerate(order, start=1):
        if head is None or abs(scores[key] - scores[head]) > tol:
            head = key
            ranks[key] = pos
        else:
            ranks[key] = ranks[head]
    return ranks


@dataclass
class TertileSummary:
    uda: int | None
    indicator: str
    efficient_count: int
    total_count: int
    tertile_means: tuple[float, float, float] | None
    group_sizes: tuple[int, int, int]
    degenerate: bool = False


def tertile_sizes(m: int) -> tuple[int, int, int]:
    base, extra = divmod(m, 3)
    return tuple(base + (1 if i < extra else 0) for i in range(3))


def tertile_summary(
    records: Iterable[EfficiencyRecord],
    score_selector: str | Callable[[EfficiencyRecord], float] = "te",
    uda: int | None = None,
) -> TertileSummary:
    """Count efficient units and average the inefficient ones in three sorted groups.

    With fewer than three inefficient units the summary is flagged
    ``degenerate`` and carries no means.
    """
    if callable(score_selector):
        get, name = score_selector, getattr(score_selector, "__name__", "score")
    else:
        get, name = (lambda r: getattr(r, score_selector)), score_selector
    scores = [get(r) for r in records if r.evaluated]
    efficient = sum(s >= 1.0 - EFFICIENT_TOL for s in scores)
    rest = sorted((s for s in scores if s < 1.0 - EFFICIENT_TOL), reverse=True)
    sizes = tertile_sizes(len(rest))
    if len(rest) < 3:
        return TertileSummary(uda, name, efficient, len(scores), None, sizes, degenerate=True)
    means = []
    start = 0
    for size in sizes:
        means.append(math.fsum(rest[start:start + size]) / size)
        start += size
    return TertileSummary(uda, name, efficient, len(scores), tuple(means), sizes)


@dataclass
class RankVariationStats:
    changed_count: int
    total_count: int
    max_variation: int
    average_variation: float
    median_variation: float
    coefficient_of_variation: float

    def to_dict(self) -> dict:
        return asdict(self)


def rank_variation(ranks_a: Mapping[str, int], ranks_b: Mapping[str, int]) -> RankVariationStats:
    """Distribution of absolute rank shifts between two rankings of the same units.

    Average, median and coefficient of variation (population std / mean) are
    taken over all units, including unchanged ones; CV is 0 when no unit moves.
    """
    if set(ranks_a) != set(ranks_b):
        diff = sorted(set(ranks_a) ^ set(ranks_b), key=natural_key)
        raise KeyMismatch(f"rankings cover different DMUs: {diff}")
    if not ranks_a:
        return RankVariationStats(0, 0, 0, 0.0, 0.0, 0.0)
    d = [abs(ranks_a[k] - ranks_b[k]) for k in sorted(ranks_a, key=natural_key)]
    mean = statistics.fmean(d)
    cv = statistics.pstdev(d) / mean if mean > 0 else 0.0
    return RankVariationStats(
        changed_count=sum(v > 0 for v in d),
        total_count=len(d),
        max_variation=max(d),
        average_variation=mean,
        median_variation=float(statistics.median(d)),
        coefficient_of_variation=cv,
    )


@dataclass
class VariableStats:
    ave: float
    min: float
    max: float
    std: float


def descriptive_stats(panel: DmuPanel) -> dict[str, VariableStats]:
    """Mean, min, max and population standard deviation of each input and output."""
    data = np.hstack([panel.inputs, panel.outputs])
    names = INPUT_NAMES + OUTPUT_NAMES
    return {
        name: VariableStats(
            float(col.mean()), float(col.min()), float(col.max()), float(col.std())
        )
        for name, col in zip(names, data.T)
    }


@dataclass
class IndicatorRow:
    dmu_id: str
    status: str
    scientists: float
    scores: dict[str, float | None]
    ranks: dict[str, int | None]
    peers: list[tuple[str, float]]


@dataclass
class IndicatorTable:
    uda: int
    rows: list[IndicatorRow]


def indicator_table(
    panel: DmuPanel,
    records: Iterable[EfficiencyRecord],
    costs: CostVector = CostVector(),
    output_selector: str = "pu",
    cost_scale: float = 1.0,
) -> IndicatorTable:
    """Five-indicator score and rank table; flagged units are listed without scores."""
    records = list(records)
    evaluated = [r for r in records if r.evaluated]
    ratios = partial_indicators(
        panel, costs, output_selector, cost_scale, dmus=[r.dmu_id for r in evaluated]
    )
    scores = {
        "te": {r.dmu_id: r.te for r in evaluated},
        "ae": {r.dmu_id: r.ae for r in evaluated},
        "ce": {r.dmu_id: r.ce for r in evaluated},
        "output_per_scientist": {k: v[0] for k, v in ratios.items()},
        "output_per_cost": {k: v[1] for k, v in ratios.items()},
    }
    ranks = {name: rank(s) for name, s in scores.items()}
    rows = []
    for r in sorted(records, key=lambda r: natural_key(r.dmu_id)):
        staff = float(panel.inputs[panel.index(r.dmu_id)].sum())
        if r.evaluated:
            rows.append(IndicatorRow(
                r.dmu_id, r.status.value, staff,
                {k: scores[k][r.dmu_id] for k in INDICATORS},
                {k: ranks[k][r.dmu_id] for k in INDICATORS},
                frontier_peers(r),
            ))
        else:
            rows.append(IndicatorRow(
                r.dmu_id, r.status.value, staff,
                dict.fromkeys(INDICATORS), dict.fromkeys(INDICATORS), [],
            ))
    return IndicatorTable(panel.uda, rows)
