import csv
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dea_research.dea import CostVector, DmuPanel, DmuStatus, EfficiencyRecord, evaluate_panel
from dea_research.errors import KeyMismatch, ZeroStaff
from dea_research.reporting import (
    descriptive_stats,
    indicator_table,
    partial_indicators,
    rank,
    rank_variation,
    tertile_sizes,
    tertile_summary,
)


def rec(dmu, te, ce=None):
    return EfficiencyRecord(dmu, DmuStatus.EVALUATED, te=te, ce=ce if ce is not None else te)


def test_partial_indicators_ratio():
    p = DmuPanel.from_bundles(1, [("A", (5, 5, 10), (10, 8, 12))], 0)
    ops, opc = partial_indicators(p)["A"]
    assert ops == 0.5
    assert opc == pytest.approx(10 / (5 * 1.814 + 5 * 1.370 + 10 * 1.0))


def test_partial_indicators_cost_scaling():
    p = DmuPanel.from_bundles(1, [("A", (2, 2, 2), (6, 1, 1)), ("B", (3, 3, 3), (6, 1, 1))], 0)
    a = partial_indicators(p, CostVector())
    b = partial_indicators(p, CostVector().scaled(2))
    for k in a:
        assert b[k][1] == pytest.approx(a[k][1] / 2)
    assert rank({k: v[1] for k, v in a.items()}) == rank({k: v[1] for k, v in b.items()})


def test_partial_indicators_zero_staff():
    p = DmuPanel.from_bundles(1, [("A", (0, 0, 0), (1, 1, 1))], 0)
    with pytest.raises(ZeroStaff):
        partial_indicators(p)


def test_output_per_scientist_round_trip_format():
    # a published row lists 13 scientists at 0.974 publications each
    implied = 0.974 * 13
    assert implied == pytest.approx(12.66, abs=0.01)
    p = DmuPanel.from_bundles(1, [("U8", (5, 4, 4), (implied, 0, 0))], 0)
    assert f"{partial_indicators(p)['U8'][0]:.3f}" == "0.974"


def test_rank_examples():
    assert rank({"A": 1.0, "B": 1.0, "C": 0.5}) == {"A": 1, "B": 1, "C": 3}
    assert rank({"A": 0.2}) == {"A": 1}
    assert rank({"A": 0.9, "B": 0.5, "C": 0.1}) == {"A": 1, "B": 2, "C": 3}
    assert rank({"A": 0.9, "B": 0.5, "C": 0.1}, higher_is_better=False) == {"A": 3, "B": 2, "C": 1}


def test_rank_tolerance_merges_float_noise():
    assert rank({"A": 1.0, "B": 1.0 - 1e-13, "C": 0.9}) == {"A": 1, "B": 1, "C": 3}


@settings(max_examples=80)
@given(
    st.lists(st.integers(0, 20), min_size=1, max_size=25),
    st.floats(0.1, 100.0),
    st.floats(-50.0, 50.0),
)
def test_rank_affine_invariance(values, a, b):
    scores = {f"d{i}": float(v) for i, v in enumerate(values)}
    moved = {k: a * v + b for k, v in scores.items()}
    assert rank(scores, tol=0.0) == rank(moved, tol=0.0)


def test_tertile_example():
    scores = [0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2]
    t = tertile_summary([rec(f"d{i}", s) for i, s in enumerate(scores)] + [rec("e", 1.0)])
    assert t.group_sizes == (3, 3, 2)
    assert t.efficient_count == 1
    np.testing.assert_allclose(t.tertile_means, (0.8, 0.5, 0.25), atol=1e-12)


def test_tertile_all_efficient_degenerate():
    t = tertile_summary([rec("a", 1.0), rec("b", 1.0)])
    assert t.efficient_count == 2 and t.degenerate and t.tertile_means is None


def test_tertile_published_format_fixture():
    # published mathematics row: 6 efficient of 53, tertile means 0.714 / 0.485 / 0.345
    row = ("6 (out of 53)", 0.714, 0.485, 0.345)
    efficient, total = (int(v) for v in row[0].replace("(out of", "").rstrip(")").split())
    assert (efficient, total) == (6, 53)
    assert tertile_sizes(total - efficient) == (16, 16, 15)
    assert row[1] >= row[2] >= row[3]


@pytest.mark.parametrize("m", range(0, 12))
def test_tertile_sizes_balanced(m):
    sizes = tertile_sizes(m)
    assert sum(sizes) == m and max(sizes) - min(sizes) <= 1 and list(sizes) == sorted(sizes, reverse=True)


@settings(max_examples=80)
@given(st.lists(st.floats(0.01, 0.99), min_size=3, max_size=40))
def test_tertile_means_properties(scores):
    t = tertile_summary([rec(f"d{i}", s) for i, s in enumerate(scores)])
    m1, m2, m3 = t.tertile_means
    assert m1 >= m2 >= m3
    weighted = sum(m * n for m, n in zip(t.tertile_means, t.group_sizes)) / len(scores)
    assert weighted == pytest.approx(statistics.fmean(scores), abs=1e-12)


def test_rank_variation_examples():
    same = rank_variation({"a": 1, "b": 2}, {"a": 1, "b": 2})
    assert (same.changed_count, same.max_variation, same.average_variation,
            same.coefficient_of_variation) == (0, 0, 0.0, 0.0)

    # d = [2, 1, 1, 1, 1]: mean 1.2, population std 0.4, cv 1/3
    a = dict(zip("abcde", [1, 2, 3, 4, 5]))
    b = dict(zip("abcde", [3, 1, 2, 5, 4]))
    s = rank_variation(a, b)
    assert (s.changed_count, s.total_count, s.max_variation) == (5, 5, 2)
    assert s.average_variation == pytest.approx(1.2)
    assert s.median_variation == 1
    assert s.coefficient_of_variation == pytest.approx(1 / 3)

    swap = rank_variation({"a": 1, "b": 2, "c": 3}, {"a": 2, "b": 1, "c": 3})
    assert (swap.changed_count, swap.max_variation) == (2, 1)


def test_rank_variation_key_mismatch():
    with pytest.raises(KeyMismatch):
        rank_variation({"a": 1}, {"b": 1})


@settings(max_examples=60)
@given(st.permutations(list(range(1, 12))), st.permutations(list(range(1, 12))))
def test_rank_variation_symmetric(pa, pb):
    a = {f"d{i}": r for i, r in enumerate(pa)}
    b = {f"d{i}": r for i, r in enumerate(pb)}
    assert rank_variation(a, b) == rank_variation(b, a)
    s = rank_variation(a, b)
    assert 0 <= s.changed_count <= s.total_count
    assert s.max_variation >= s.median_variation >= 0


def test_descriptive_stats():
    p = DmuPanel.from_bundles(1, [("A", (0, 3, 3), (1, 1, 1)), ("B", (10, 3, 3), (2, 1, 1))], 0)
    s = descriptive_stats(p)
    assert (s["fp"].ave, s["fp"].std, s["fp"].min, s["fp"].max) == (5.0, 5.0, 0.0, 10.0)
    assert s["ap"].std == 0 and s["ap"].min == s["ap"].max
    single = descriptive_stats(DmuPanel.from_bundles(1, [("A", (1, 2, 3), (4, 5, 6))], 0))
    assert single["ss"].ave == single["ss"].min == single["ss"].max == 6 and single["ss"].std == 0


def test_indicator_table_lists_flagged_units():
    p = DmuPanel.from_bundles(1, [
        ("S", (1, 1, 1), (5, 5, 5)),
        ("A", (3, 3, 3), (5, 4, 6)),
        ("B", (4, 2, 5), (6, 5, 4)),
    ], 5)
    table = indicator_table(p, evaluate_panel(p))
    rows = {r.dmu_id: r for r in table.rows}
    assert rows["S"].ranks["te"] is None and rows["S"].status == "ExcludedSmall"
    assert rows["S"].scores["output_per_scientist"] is None
    assert min(rows[d].ranks["te"] for d in "AB") == 1
    assert all(rows[d].ranks[ind] is not None for d in "AB" for ind in rows[d].ranks)


def load_published():
    from pathlib import Path

    path = Path(__file__).parent / "data" / "published_mathematics_scores.csv"
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_published_table_has_53_rows():
    assert len(load_published()) == 53
