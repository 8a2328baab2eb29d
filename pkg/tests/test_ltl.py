import pytest
from hypothesis import given, settings, strategies as st

from lnc.ltl import (
    And,
    Atom,
    Always,
    Eventually,
    FalseF,
    Next,
    Not,
    Or,
    ParseError,
    Release,
    TrueF,
    Until,
    build_fairness,
    build_phi,
    build_phi_ij,
    build_psi,
    eval_lasso,
    formula_size,
    is_nnf,
    link_prop,
    link_word,
    node_prop,
    node_word,
    parse,
    render,
    semantic_laplacian_step,
    simplify,
    to_nnf,
)
from lnc.network import build_geometric_graph, graph_from_edges, random_geometric_network
from lnc.ts import sequential_schedule

P = link_prop(0, 1)
Q = link_prop(2, 3)
DECLS = {"p": P, "q": Q}


# ---------------------------------------------------------------------------
# parsing

def test_parse_implication_desugars():
    f = parse("G (p -> X q)", DECLS)
    assert f == Always(Or((Not(Atom(P)), Next(Atom(Q)))))


def test_parse_until_of_true_is_plain_until():
    assert parse("true U p", DECLS) == Until(TrueF(), Atom(P))


def test_parse_recurrence_surface_form():
    assert parse("G F e_0_1") == Always(Eventually(Atom(link_prop(0, 1))))


def test_parse_precedence_unary_until_and_or():
    f = parse("!p U q & p | q", DECLS)
    # unary > U > & > |
    assert f == Or((And((Until(Not(Atom(P)), Atom(Q)), Atom(P))), Atom(Q)))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError):
        parse("G (p -> ", DECLS)
    with pytest.raises(ParseError, match="undeclared"):
        parse("G unknown_prop")


def test_parse_command_props():
    assert parse("c_3") == Atom(node_prop(3))


@st.composite
def formulas(draw, depth=3):
    if depth == 0:
        return draw(st.sampled_from([Atom(P), Atom(Q), TrueF(), FalseF()]))
    kind = draw(st.integers(0, 7))
    sub = formulas(depth=depth - 1)
    if kind == 0:
        return Not(draw(sub))
    if kind == 1:
        return Next(draw(sub))
    if kind == 2:
        return Always(draw(sub))
    if kind == 3:
        return Eventually(draw(sub))
    if kind == 4:
        return Until(draw(sub), draw(sub))
    if kind == 5:
        return Release(draw(sub), draw(sub))
    if kind == 6:
        return And((draw(sub), draw(sub)))
    return Or((draw(sub), draw(sub)))


@given(formulas())
@settings(max_examples=150)
def test_render_parse_roundtrip(f):
    assert parse(render(f)) == f


# ---------------------------------------------------------------------------
# negation normal form

def test_nnf_dualities():
    assert to_nnf(Not(Always(Atom(P)))) == Eventually(Not(Atom(P)))
    assert to_nnf(Not(Until(Atom(P), Atom(Q)))) == Release(Not(Atom(P)), Not(Atom(Q)))
    assert to_nnf(Not(Not(Atom(P)))) == Atom(P)


lasso_words = st.lists(
    st.frozensets(st.sampled_from([P, Q]), max_size=2), min_size=0, max_size=3
)
lasso_suffixes = st.lists(
    st.frozensets(st.sampled_from([P, Q]), max_size=2), min_size=1, max_size=3
)


@given(formulas(), lasso_words, lasso_suffixes)
@settings(max_examples=200)
def test_nnf_preserves_lasso_semantics(f, prefix, suffix):
    g = to_nnf(f)
    assert is_nnf(g)
    assert eval_lasso(f, prefix, suffix) == eval_lasso(g, prefix, suffix)


@given(formulas(), lasso_words, lasso_suffixes)
@settings(max_examples=200)
def test_simplify_preserves_lasso_semantics(f, prefix, suffix):
    assert eval_lasso(f, prefix, suffix) == eval_lasso(simplify(f), prefix, suffix)


# ---------------------------------------------------------------------------
# lasso evaluation

def test_eval_eventually_on_prefix():
    assert eval_lasso(Eventually(Atom(P)), [frozenset()], [{P}, frozenset()])


def test_eval_recurrence_needs_suffix_occurrences():
    f = Always(Eventually(Atom(P)))
    assert not eval_lasso(f, [], [frozenset(), frozenset()])
    assert eval_lasso(f, [{P}], [frozenset(), {P}])


def test_eval_rejects_empty_suffix():
    with pytest.raises(ValueError):
        eval_lasso(Atom(P), [{P}], [])


def test_spec_formula_on_path_alternation(path3):
    phi = build_phi(path3)
    a, b = path3.sorted_edges()
    word = link_word([set(), {a}])
    assert eval_lasso(phi, word, link_word([{b}, {a}]))


# ---------------------------------------------------------------------------
# builders

def test_phi_ij_isolated_edge_safety_trivial(single_edge):
    f = build_phi_ij(single_edge, (0, 1))
    pi = Atom(link_prop(0, 1))
    assert f == And((Always(Or((Not(pi), TrueF()))), Always(Eventually(pi))))
    assert simplify(f) == Always(Eventually(pi))


def _count_negated_atoms(f):
    if isinstance(f, Not) and isinstance(f.child, Atom):
        return 1
    if isinstance(f, (And, Or)):
        return sum(_count_negated_atoms(c) for c in f.children)
    if isinstance(f, (Not, Next, Always, Eventually)):
        return _count_negated_atoms(f.child)
    if isinstance(f, (Until, Release)):
        return _count_negated_atoms(f.left) + _count_negated_atoms(f.right)
    return 0


def test_phi_ij_middle_edge_of_path4_excludes_two(path4):
    middle = (1, 2)
    safety = build_phi_ij(path4, middle).children[0]
    assert _count_negated_atoms(safety) == 3  # the trigger plus both neighbors


def test_phi_ij_triangle_edge_excludes_two(triangle):
    safety = build_phi_ij(triangle, (0, 1)).children[0]
    assert _count_negated_atoms(safety) == 3


def test_phi_empty_graph_is_true():
    net = build_geometric_graph([(0.0, 0.0), (9.0, 9.0)], 1.0)
    assert build_phi(net) == TrueF()


def test_phi_single_edge_is_the_lone_conjunct(single_edge):
    assert build_phi(single_edge) == build_phi_ij(single_edge, (0, 1))


def test_phi_unknown_edge_rejected(path3):
    with pytest.raises(KeyError):
        build_phi_ij(path3, (0, 2))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_phi_size_linear_in_neighborhood_mass(seed):
    net = random_geometric_network(12, 2.7, seed=seed)
    mass = sum(len(net.link_neighborhood(e)) for e in net.edges)
    size = formula_size(build_phi(net))
    if not net.edges:
        pytest.skip("degenerate draw")
    assert mass <= size <= 6 * mass + 6


@pytest.mark.parametrize("seed", [3, 4, 5, 6])
def test_phi_satisfiable_via_sequential_witness(seed):
    net = random_geometric_network(8, 2.5, seed=seed)
    seq = sequential_schedule(net)
    assert eval_lasso(build_phi(net), link_word(seq.prefix), link_word(seq.suffix))


def test_psi_two_connected_commands_alternate_up_to_stutter():
    g = graph_from_edges([(0, 1)])
    psi = build_psi(g)
    assert eval_lasso(psi, [], node_word([{0}, {1}]))
    assert not eval_lasso(psi, [], node_word([{0, 1}]))


def test_psi_two_disconnected_commands_allow_joint_activation():
    g = graph_from_edges([], nodes=[0, 1])
    psi = build_psi(g)
    assert eval_lasso(psi, [], node_word([{0, 1}]))


def test_psi_star_center_excludes_leaves_only():
    g = graph_from_edges([(0, 1), (0, 2)])
    psi = build_psi(g)
    assert eval_lasso(psi, [], node_word([{1, 2}, {0}]))
    assert not eval_lasso(psi, [], node_word([{0, 1}, {2}]))


def test_fairness_alternation(path3):
    a, b = path3.sorted_edges()
    chi_a = build_fairness(path3, a)
    chi_b = build_fairness(path3, b)
    alternation = link_word([{a}, {b}])
    assert eval_lasso(And((chi_a, chi_b)), [], alternation)
    assert not eval_lasso(chi_a, [], link_word([{a}, {a}, {b}]))


def test_fairness_rejects_isolated_edge(single_edge):
    with pytest.raises(ValueError):
        build_fairness(single_edge, (0, 1))


# ---------------------------------------------------------------------------
# formula diffusion over a graph

def test_laplacian_step_isolated_node_unchanged():
    g = graph_from_edges([], nodes=[0])
    f = And((Atom(Q), Atom(P)))  # deliberately unsorted
    assert semantic_laplacian_step(g, {0: f})[0] is f


def test_laplacian_step_edge_conjoins_both():
    g = graph_from_edges([(0, 1)])
    out = semantic_laplacian_step(g, {0: Atom(P), 1: Atom(Q)})
    assert out[0] == out[1] == And((Atom(P), Atom(Q)))


def test_laplacian_step_path3_uniform_after_two():
    g = graph_from_edges([(0, 1), (1, 2)])
    assignment = {0: Atom(P), 1: Atom(Q), 2: Atom(link_prop(4, 5))}
    once = semantic_laplacian_step(g, assignment)
    twice = semantic_laplacian_step(g, once)
    assert len({render(f) for f in twice.values()}) == 1
