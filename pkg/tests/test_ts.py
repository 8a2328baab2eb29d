import json

import pytest
from hypothesis import given, settings, strategies as st

from lnc.errors import BudgetExceededError
from lnc.ltl import link_neighborhood_of
from lnc.network import build_geometric_graph, random_geometric_network
from lnc.ts import (
    HausdorffCost,
    JaccardCost,
    Schedule,
    build_link_ts,
    build_product_ts,
    cost_to_go,
    jaccard_cost,
    plan_cost,
    schedule_from_json,
    schedule_to_json,
    sequential_schedule,
)


# ---------------------------------------------------------------------------
# single-link system

def test_link_ts_transition_table():
    ts = build_link_ts((1, 0))
    assert ts.edge == (0, 1)
    assert ts.initial == "inactive"
    assert ts.step("inactive", "standby") == "inactive"
    assert ts.step("active", "standby") == "active"
    assert ts.step("inactive", "switch") == "active"
    assert ts.step("active", "switch") == "inactive"


def test_link_ts_switch_is_involution():
    ts = build_link_ts((0, 1))
    for s in ts.states:
        assert ts.step(ts.step(s, "switch"), "switch") == s


def test_link_ts_observation():
    ts = build_link_ts((0, 1))
    assert ts.observation("active") == {(0, 1)}
    assert ts.observation("inactive") == frozenset()


# ---------------------------------------------------------------------------
# joint activation system

def test_single_edge_product_has_two_states(single_edge):
    pts = build_product_ts(single_edge)
    assert len(pts.states) == 2


def test_path3_non_interfering_states(path3):
    pts = build_product_ts(path3, "non_interfering")
    observed = {pts.observation(m) for m in pts.states}
    assert observed == {frozenset(), frozenset({(0, 1)}), frozenset({(1, 2)})}


def test_disjoint_edges_allow_joint_state(two_disjoint):
    pts = build_product_ts(two_disjoint, "non_interfering")
    assert len(pts.states) == 4
    assert frozenset({(0, 1), (4, 5)}) in {pts.observation(m) for m in pts.states}


@pytest.mark.parametrize("n_extra", range(4))
def test_complete_policy_counts_all_subsets(n_extra):
    pts_n = 2 + n_extra
    net = build_geometric_graph([(float(i), 0.0) for i in range(pts_n)], 1.0)
    pts = build_product_ts(net, "complete")
    assert len(pts.states) == 2 ** len(net.edges)


def test_budget_enforced(two_disjoint):
    with pytest.raises(BudgetExceededError):
        build_product_ts(two_disjoint, "complete", state_budget=2)


@pytest.mark.parametrize("seed", range(5))
def test_non_interfering_states_are_interference_free(seed):
    net = random_geometric_network(8, 2.6, seed=seed)
    pts = build_product_ts(net, "non_interfering")
    for m in pts.states:
        active = pts.observation(m)
        for e in active:
            assert link_neighborhood_of(net, e) & active == {e}


# ---------------------------------------------------------------------------
# costs

def test_jaccard_cases():
    a, b, c = (0, 1), (1, 2), (2, 3)
    assert jaccard_cost(frozenset({a}), frozenset({a})) == 0.0
    assert jaccard_cost(frozenset({a}), frozenset({c})) == 1.0
    assert jaccard_cost(frozenset({a, b}), frozenset({b, c})) == pytest.approx(2 / 3)
    assert jaccard_cost(frozenset(), frozenset()) == 0.0


edge_subsets = st.frozensets(
    st.sampled_from([(0, 1), (1, 2), (2, 3), (0, 3)]), max_size=4
)


@given(edge_subsets, edge_subsets, edge_subsets)
@settings(max_examples=200)
def test_jaccard_is_a_metric(a, b, c):
    d = jaccard_cost
    assert 0.0 <= d(a, b) <= 1.0
    assert d(a, b) == d(b, a)
    assert (d(a, b) == 0.0) == (a == b)
    assert d(a, c) <= d(a, b) + d(b, c) + 1e-12


def test_hausdorff_cost_conventions(two_disjoint):
    h = HausdorffCost(two_disjoint)
    near, far = frozenset({(0, 1)}), frozenset({(4, 5)})
    assert h(near, near) == 0.0
    assert h(frozenset(), frozenset()) == 0.0
    assert h(frozenset(), near) == pytest.approx(two_disjoint.diameter_bound())
    assert h(near, far) == pytest.approx(5.0)


# ---------------------------------------------------------------------------
# traces and plan cost

def test_constant_trace_costs_nothing():
    step = frozenset({(0, 1)})
    assert cost_to_go([step] * 5, JaccardCost()) == 0.0


def test_alternating_disjoint_trace():
    a, b = frozenset({(0, 1)}), frozenset({(2, 3)})
    assert cost_to_go([a, b, a], JaccardCost()) == 2.0


def test_sequential_cycle_over_triangle_costs_three(triangle):
    seq = sequential_schedule(triangle)
    cycle = [*seq.suffix, seq.suffix[0]]
    assert cost_to_go(cycle, JaccardCost()) == 3.0  # every hop is maximal


def test_plan_cost_constant_suffix_is_free():
    s = Schedule((), (frozenset({(0, 1)}),))
    assert plan_cost(s, JaccardCost()) == 0.0


def test_plan_cost_charges_wrap():
    empty, a = frozenset(), frozenset({(0, 1)})
    s = Schedule((empty, a), (a,))
    assert plan_cost(s, JaccardCost()) == 1.0


def test_cost_to_go_additive_on_shared_boundary():
    a, b, c = frozenset({(0, 1)}), frozenset({(1, 2)}), frozenset()
    trace = [c, a, b, a, c]
    k = 2
    total = cost_to_go(trace, JaccardCost())
    assert total == pytest.approx(
        cost_to_go(trace[: k + 1], JaccardCost()) + cost_to_go(trace[k:], JaccardCost())
    )


def test_schedule_word_unrolls_lasso():
    a, b = frozenset({(0, 1)}), frozenset({(1, 2)})
    s = Schedule((frozenset(),), (a, b))
    assert s.unroll(5) == [frozenset(), a, b, a, b]


def test_schedule_requires_suffix():
    with pytest.raises(ValueError):
        Schedule((frozenset(),), ())


def test_schedule_json_roundtrip():
    s = Schedule(
        (frozenset(), frozenset({(0, 1)})),
        (frozenset({(1, 2), (3, 4)}), frozenset({(0, 1)})),
    )
    doc = json.loads(json.dumps(schedule_to_json(s, 2.5)))
    assert doc["cost"] == 2.5
    assert schedule_from_json(doc) == s
