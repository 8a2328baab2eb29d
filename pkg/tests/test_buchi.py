import numpy as np
import pytest

from lnc.buchi import (
    Nba,
    degeneralize,
    nba_accepts_lasso,
    nba_from_json,
    nba_to_json,
    translate_to_gba,
    translate_to_nba,
)
from lnc.errors import BudgetExceededError
from lnc.ltl import (
    Always,
    And,
    Atom,
    Eventually,
    Not,
    Until,
    build_phi,
    build_phi_ij,
    build_psi,
    eval_lasso,
    link_prop,
    parse,
    to_nnf,
)
from lnc.network import build_geometric_graph, graph_from_edges
from lnc.oracle import random_formula, verify_translation

P = link_prop(0, 1)
Q = link_prop(2, 3)
EMPTY = frozenset()
ONLY_P = frozenset({P})


def test_always_p_single_selfloop_accepting_state():
    nba = translate_to_nba(Always(Atom(P)))
    assert nba.n_states == 1
    assert nba.initial == nba.accepting == frozenset({0})
    assert all(t.must_true == ONLY_P for t in nba.transitions)
    assert nba_accepts_lasso(nba, [], [ONLY_P])
    assert not nba_accepts_lasso(nba, [ONLY_P], [EMPTY])


def test_eventually_p_reaches_accepting_sink():
    nba = translate_to_nba(Eventually(Atom(P)))
    assert nba.n_states <= 4
    assert nba_accepts_lasso(nba, [EMPTY], [ONLY_P, EMPTY])
    assert nba_accepts_lasso(nba, [ONLY_P], [EMPTY])
    assert not nba_accepts_lasso(nba, [], [EMPTY])


def test_recurrence_automaton_language():
    nba = translate_to_nba(Always(Eventually(Atom(P))))
    assert nba_accepts_lasso(nba, [], [ONLY_P])
    assert nba_accepts_lasso(nba, [EMPTY, EMPTY], [EMPTY, ONLY_P])
    assert not nba_accepts_lasso(nba, [ONLY_P, ONLY_P], [EMPTY])


def test_contradiction_translates_to_empty_language():
    f = to_nnf(And((Always(Atom(P)), Always(Not(Atom(P))))))
    nba = translate_to_nba(f)
    assert not nba_accepts_lasso(nba, [], [ONLY_P])
    assert not nba_accepts_lasso(nba, [], [EMPTY])


def test_translation_budget_enforced():
    g = build_geometric_graph([(float(i), 0.0) for i in range(7)], 1.0)
    with pytest.raises(BudgetExceededError):
        translate_to_gba(to_nnf(build_phi(g)), state_budget=10)


def test_degeneralize_no_sets_accepts_everything():
    gba = translate_to_gba(Always(Atom(P)))
    assert gba.acc_sets == ()
    nba = degeneralize(gba)
    assert nba.accepting == frozenset(range(nba.n_states))


def test_degeneralize_counter_two_obligations():
    f = And((Always(Eventually(Atom(P))), Always(Eventually(Atom(Q)))))
    gba = translate_to_gba(to_nnf(f))
    assert len(gba.acc_sets) == 2
    nba = degeneralize(gba)
    assert nba.n_states == 2 * gba.n_states
    both = frozenset({P, Q})
    assert nba_accepts_lasso(nba, [], [ONLY_P, frozenset({Q})])
    assert nba_accepts_lasso(nba, [], [both])
    assert not nba_accepts_lasso(nba, [], [ONLY_P])


@pytest.mark.parametrize("text", [
    "G p", "F p", "G F p", "F G p", "p U q", "p R q",
    "G (p -> X q)", "G (p -> (!p U q))", "X X p", "F (p & X q)",
])
def test_translation_agrees_with_semantics(text):
    f = parse(text, {"p": P, "q": Q})
    report = verify_translation(f, max_props=2, max_len=3)
    assert report.ok, report.disagreements[:3]


def test_translation_agrees_on_spec_builders(path3_formulas=None):
    net = build_geometric_graph([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], 1.1)
    for f in [build_phi_ij(net, (0, 1)), build_phi(net),
              build_psi(graph_from_edges([(0, 1)]))]:
        report = verify_translation(f, max_props=2, max_len=3)
        assert report.ok


@pytest.mark.parametrize("seed", range(20))
def test_translation_agrees_on_random_formulas(seed):
    rng = np.random.default_rng(seed)
    f = random_formula(rng, [P, Q], 8)
    report = verify_translation(f, max_props=2, max_len=3)
    assert report.ok, (f, report.disagreements[:3])


def test_corrupted_accepting_set_is_detected():
    f = Always(Eventually(Atom(P)))
    nba = translate_to_nba(f)
    broken = Nba(nba.n_states, nba.initial, frozenset(), nba.transitions)
    report = verify_translation(f, nba=broken)
    assert not report.ok and report.disagreements


def test_lasso_acceptance_requires_nonempty_suffix():
    nba = translate_to_nba(Always(Atom(P)))
    with pytest.raises(ValueError):
        nba_accepts_lasso(nba, [ONLY_P], [])


def test_until_is_not_release():
    nba_u = translate_to_nba(Until(Atom(P), Atom(Q)))
    nba_r = translate_to_nba(parse("p R q", {"p": P, "q": Q}))
    # q holding once satisfies the until; the release needs q to persist
    word = [frozenset({Q}), EMPTY]
    assert nba_accepts_lasso(nba_u, [], word)
    assert not nba_accepts_lasso(nba_r, [], word)


def test_json_roundtrip_preserves_language():
    f = parse("G (p -> F q)", {"p": P, "q": Q})
    nba = translate_to_nba(f)
    clone = nba_from_json(nba_to_json(nba))
    report = verify_translation(f, nba=clone)
    assert report.ok


def test_accepting_states_all_reachable():
    for text in ["G F p", "F G p", "p U q", "G (p -> X q)"]:
        nba = translate_to_nba(parse(text, {"p": P, "q": Q}))
        reach = set(nba.initial)
        frontier = list(reach)
        while frontier:
            s = frontier.pop()
            for t in nba.successors[s]:
                if t.dst not in reach:
                    reach.add(t.dst)
                    frontier.append(t.dst)
        assert nba.accepting <= reach


def test_transition_labels_are_consistent():
    nba = translate_to_nba(parse("G (p -> X !q)", {"p": P, "q": Q}))
    for t in nba.transitions:
        assert not (t.must_true & t.must_false)
