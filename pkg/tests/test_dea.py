import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dea_research.dea import (
    CostVector,
    DmuPanel,
    DmuStatus,
    allocative_efficiency,
    cost_efficiency,
    evaluate_panel,
    frontier_peers,
    technical_efficiency,
)
from dea_research.errors import (
    DegenerateZeroOutput,
    DomainError,
    MalformedPanel,
    NotEligible,
    PanelEmpty,
)
from oracles import brute_force_ce, brute_force_te, random_panel

W_PAPER = CostVector()


def panel_of(X, Y, threshold=0.0, ids=None):
    ids = ids or [f"D{i}" for i in range(len(X))]
    return DmuPanel(1, tuple(ids), np.asarray(X, float), np.asarray(Y, float), threshold)


def test_single_dmu_is_efficient(options):
    p = panel_of([[3, 2, 1]], [[4, 2, 5]])
    assert technical_efficiency(p, "D0", options).te == 1.0
    assert cost_efficiency(p, "D0", W_PAPER, options).ce == pytest.approx(1.0, abs=1e-12)


def test_single_ratio_instance(options):
    p = panel_of([[1, 0, 0], [2, 0, 0]], [[1, 0, 0], [1, 0, 0]])
    assert technical_efficiency(p, "D0", options).te == pytest.approx(1.0, abs=1e-12)
    assert technical_efficiency(p, "D1", options).te == pytest.approx(0.5, abs=1e-12)


def test_hand_instance_te_and_peers(hand_panel, options):
    rec = technical_efficiency(hand_panel, "C", options)
    assert rec.te == pytest.approx(0.75, abs=1e-9)
    assert frontier_peers(rec) == [("A", pytest.approx(0.5)), ("B", pytest.approx(0.5))]


def test_hand_instance_cost(hand_panel, options):
    rec = cost_efficiency(hand_panel, "A", CostVector(1, 3, 1), options)
    # cheapest way to make one unit: all weight on B, cost 4 + 3*2 = 10; A costs 2 + 3*4 = 14
    assert rec.ce == pytest.approx(10 / 14, abs=1e-9)
    assert rec.lambdas == {"B": pytest.approx(1.0)}
    assert rec.min_cost_inputs[:2] == (pytest.approx(4.0), pytest.approx(2.0))


def test_hand_instance_symmetric_costs(hand_panel, options):
    recs = {r.dmu_id: r for r in evaluate_panel(hand_panel, CostVector(1, 1, 1), options)}
    c = recs["C"]
    assert c.te == pytest.approx(0.75, abs=1e-9)
    assert c.ce == pytest.approx(0.75, abs=1e-9)
    assert c.ae == pytest.approx(1.0, abs=1e-9)


def test_paper_table8_identity():
    # University 1 in the mathematics table: te 0.251, ae 0.819, ce 0.206
    assert 0.251 * 0.819 == pytest.approx(0.206, abs=5e-4)
    assert allocative_efficiency(0.251, 0.206) == pytest.approx(0.8207, abs=1e-4)


def test_allocative_efficiency_values():
    assert allocative_efficiency(1.0, 1.0) == 1.0
    assert allocative_efficiency(0.5, 0.25) == 0.5


@pytest.mark.parametrize("te,ce", [(0.5, 0.6), (0.0, 0.0), (1.2, 0.5), (0.5, -0.1)])
def test_allocative_efficiency_domain(te, ce):
    with pytest.raises(DomainError):
        allocative_efficiency(te, ce)


def test_small_unit_excluded_and_off_frontier(options):
    # S has 4 staff and would dominate everything if it were allowed on the frontier
    p = DmuPanel.from_bundles(1, [
        ("S", (2, 1, 1), (50, 50, 50)),
        ("A", (3, 3, 3), (5, 4, 6)),
        ("B", (4, 2, 5), (6, 5, 4)),
    ], min_staff_threshold=5)
    recs = {r.dmu_id: r for r in evaluate_panel(p, W_PAPER, options)}
    assert recs["S"].status is DmuStatus.EXCLUDED_SMALL
    assert recs["S"].te is None
    assert all("S" not in r.lambdas for r in recs.values())
    assert max(r.te for r in recs.values() if r.evaluated) == pytest.approx(1.0)
    with pytest.raises(NotEligible):
        technical_efficiency(p, "S", options)


def test_zero_output_unit_flagged(options):
    p = DmuPanel.from_bundles(1, [
        ("Z", (5, 5, 5), (0, 0, 0)),
        ("A", (3, 3, 3), (5, 4, 6)),
    ], min_staff_threshold=5)
    recs = {r.dmu_id: r for r in evaluate_panel(p, W_PAPER, options)}
    assert recs["Z"].status is DmuStatus.DEGENERATE_ZERO_OUTPUT
    assert "Z" not in recs["A"].lambdas
    with pytest.raises(DegenerateZeroOutput):
        technical_efficiency(p, "Z", options)


def test_panel_empty():
    p = DmuPanel.from_bundles(1, [("A", (1, 1, 1), (1, 1, 1))], min_staff_threshold=5)
    with pytest.raises(PanelEmpty):
        evaluate_panel(p)


def test_identical_dmus_all_efficient(options):
    p = panel_of([[3, 4, 5]] * 4, [[2, 2, 7]] * 4)
    for r in evaluate_panel(p, W_PAPER, options):
        assert (r.te, r.ae, r.ce) == (pytest.approx(1.0), pytest.approx(1.0), pytest.approx(1.0))


def test_zero_input_column_forces_zero_input_peers(options):
    # D0 uses no RF; only peers without RF may serve as its reference
    p = panel_of([[5, 5, 0], [1, 1, 1], [4, 6, 0]], [[3, 3, 3], [3, 3, 3], [3, 3, 3]])
    rec = technical_efficiency(p, "D0", options)
    assert "D1" not in rec.lambdas
    assert rec.te == pytest.approx(1.0)


def test_records_sorted_naturally():
    p = panel_of([[5, 5, 5]] * 3, [[1, 1, 1]] * 3, ids=["U10", "U2", "U1"])
    assert [r.dmu_id for r in evaluate_panel(p)] == ["U1", "U2", "U10"]


def test_frontier_peers_requires_evaluated():
    p = DmuPanel.from_bundles(1, [("S", (1, 1, 1), (1, 1, 1)), ("A", (5, 5, 5), (1, 1, 1))], 5)
    small = evaluate_panel(p)[1]
    assert small.dmu_id == "S"
    with pytest.raises(DomainError):
        frontier_peers(small)


def test_fully_efficient_peer_is_itself(hand_panel):
    rec = technical_efficiency(hand_panel, "A")
    assert frontier_peers(rec) == [("A", pytest.approx(1.0))]


@pytest.mark.parametrize("bad", [
    dict(ids=("A", "A")),
    dict(X=[[1, -1, 1], [1, 1, 1]]),
    dict(X=[[1, np.nan, 1], [1, 1, 1]]),
])
def test_malformed_panel(bad):
    X = bad.get("X", [[1, 1, 1], [1, 1, 1]])
    with pytest.raises(MalformedPanel):
        DmuPanel(1, bad.get("ids", ("A", "B")), np.array(X, float), np.ones((2, 3)))


def test_cost_vector_validation():
    with pytest.raises(DomainError):
        CostVector(1.0, 0.0, 1.0)


def test_oracle_on_hand_instance(hand_panel):
    X, Y = hand_panel.inputs, hand_panel.outputs
    assert brute_force_te(X, Y, 2) == pytest.approx(0.75)
    assert brute_force_ce(X, Y, 0, np.array([1.0, 3.0, 1.0])) == pytest.approx(10 / 14)


def test_random_panels_match_vertex_enumeration(options):
    rng = np.random.default_rng(11)
    for _ in range(40):
        X, Y = random_panel(rng)
        p = panel_of(X, Y)
        w = W_PAPER.as_array()
        for rec in evaluate_panel(p, W_PAPER, options):
            o = p.index(rec.dmu_id)
            assert rec.te == pytest.approx(brute_force_te(X, Y, o), abs=1e-6)
            assert rec.ce == pytest.approx(brute_force_ce(X, Y, o, w), abs=1e-6)


panels = st.integers(1, 7).flatmap(
    lambda n: st.tuples(
        st.lists(st.lists(st.integers(1, 20), min_size=3, max_size=3), min_size=n, max_size=n),
        st.lists(st.lists(st.integers(1, 20), min_size=3, max_size=3), min_size=n, max_size=n),
    )
)


@settings(max_examples=40, deadline=None)
@given(data=panels, col=st.integers(0, 5), k=st.floats(0.1, 10.0))
def test_units_invariance(data, col, k):
    X, Y = (np.array(v, float) for v in data)
    base = [r.te for r in evaluate_panel(panel_of(X, Y))]
    if col < 3:
        X[:, col] *= k
    else:
        Y[:, col - 3] *= k
    scaled = [r.te for r in evaluate_panel(panel_of(X, Y))]
    np.testing.assert_allclose(scaled, base, atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(data=panels, k=st.floats(0.01, 100.0))
def test_cost_scale_invariance(data, k):
    p = panel_of(*data)
    a = [r.ce for r in evaluate_panel(p, W_PAPER)]
    b = [r.ce for r in evaluate_panel(p, W_PAPER.scaled(k))]
    np.testing.assert_allclose(a, b, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(data=panels)
def test_score_invariants(data):
    recs = evaluate_panel(panel_of(*data), W_PAPER)
    assert max(r.te for r in recs) == pytest.approx(1.0, abs=1e-9)
    by_id = {r.dmu_id: r for r in recs}
    for r in recs:
        assert 0 < r.ce <= r.te <= 1.0
        assert 0 < r.ae <= 1.0
        assert r.ce == pytest.approx(r.te * r.ae, abs=1e-9)
        for peer, _ in frontier_peers(r):
            assert by_id[peer].te == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(data=panels, extra=st.tuples(
    st.lists(st.integers(1, 20), min_size=3, max_size=3),
    st.lists(st.integers(1, 20), min_size=3, max_size=3),
))
def test_adding_dmu_never_raises_te(data, extra):
    X, Y = (np.array(v, float) for v in data)
    before = [r.te for r in evaluate_panel(panel_of(X, Y))]
    ids = [f"D{i}" for i in range(len(X))] + ["NEW"]
    bigger = panel_of(np.vstack([X, extra[0]]), np.vstack([Y, extra[1]]), ids=ids)
    after = {r.dmu_id: r.te for r in evaluate_panel(bigger)}
    for i, te in enumerate(before):
        assert after[f"D{i}"] <= te + 1e-9
