"""Translation of LTL formulas to Buchi automata, and lasso acceptance.

The translator is a tableau construction: nodes split on the expansion of
Until/Release obligations, transitions carry the source node's literal
constraints (a partial valuation: a must-true set and a must-false set),
and acceptance is generalized — one accepting set per Until subformula —
then degeneralized by a counter for the single-set automaton type.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceededError
from .ltl import (
    And,
    Atom,
    AtomicProp,
    Eventually,
    FalseF,
    LtlFormula,
    Next,
    Not,
    Or,
    Release,
    TrueF,
    Until,
    Word,
    Always,
    link_prop,
    node_prop,
    to_nnf,
)


@dataclass(frozen=True)
class NbaTransition:
    src: int
    must_true: frozenset[AtomicProp]
    must_false: frozenset[AtomicProp]
    dst: int

    def __post_init__(self):
        if self.must_true & self.must_false:
            raise ValueError("contradictory transition label")

    def admits(self, letter: frozenset[AtomicProp]) -> bool:
        return self.must_true <= letter and not (self.must_false & letter)


@dataclass(frozen=True)
class Gba:
    """Generalized Buchi automaton; a run is accepting when it visits every
    set in ``acc_sets`` infinitely often (no sets = every run accepts)."""

    n_states: int
    initial: frozenset[int]
    transitions: tuple[NbaTransition, ...]
    acc_sets: tuple[frozenset[int], ...]

    @cached_property
    def successors(self) -> tuple[tuple[NbaTransition, ...], ...]:
        out: list[list[NbaTransition]] = [[] for _ in range(self.n_states)]
        for t in self.transitions:
            out[t.src].append(t)
        return tuple(tuple(ts) for ts in out)


@dataclass(frozen=True)
class Nba:
    """Buchi automaton with a single accepting set."""

    n_states: int
    initial: frozenset[int]
    accepting: frozenset[int]
    transitions: tuple[NbaTransition, ...]

    @property
    def acc_sets(self) -> tuple[frozenset[int], ...]:
        return (self.accepting,)

    @cached_property
    def successors(self) -> tuple[tuple[NbaTransition, ...], ...]:
        out: list[list[NbaTransition]] = [[] for _ in range(self.n_states)]
        for t in self.transitions:
            out[t.src].append(t)
        return tuple(tuple(ts) for ts in out)


# ---------------------------------------------------------------------------
# tableau construction

def _expand_sugar(f: LtlFormula) -> LtlFormula:
    """Rewrite Always/Eventually into Release/Until for the tableau."""
    if isinstance(f, (TrueF, FalseF, Atom)):
        return f
    if isinstance(f, Not):
        return Not(_expand_sugar(f.child))
    if isinstance(f, And):
        return And(tuple(_expand_sugar(c) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(_expand_sugar(c) for c in f.children))
    if isinstance(f, Next):
        return Next(_expand_sugar(f.child))
    if isinstance(f, Until):
        return Until(_expand_sugar(f.left), _expand_sugar(f.right))
    if isinstance(f, Release):
        return Release(_expand_sugar(f.left), _expand_sugar(f.right))
    if isinstance(f, Always):
        return Release(FalseF(), _expand_sugar(f.child))
    if isinstance(f, Eventually):
        return Until(TrueF(), _expand_sugar(f.child))
    raise TypeError(f"not a formula: {f!r}")


def _until_subformulas(f: LtlFormula) -> list[Until]:
    seen: list[Until] = []

    def walk(g: LtlFormula) -> None:
        if isinstance(g, Until) and g not in seen:
            seen.append(g)
        if isinstance(g, (Not, Next)):
            walk(g.child)
        elif isinstance(g, (And, Or)):
            for c in g.children:
                walk(c)
        elif isinstance(g, (Until, Release)):
            walk(g.left)
            walk(g.right)

    walk(f)
    return seen


_INIT = -1


class _Draft:
    __slots__ = ("incoming", "new", "old", "nxt")

    def __init__(self, incoming: set[int], new: list[LtlFormula],
                 old: set[LtlFormula], nxt: set[LtlFormula]):
        self.incoming = incoming
        self.new = new
        self.old = old
        self.nxt = nxt

    def clone(self) -> "_Draft":
        return _Draft(set(self.incoming), list(self.new), set(self.old), set(self.nxt))


def translate_to_gba(f: LtlFormula, state_budget: int = 100_000) -> Gba:
    """Tableau translation to a generalized Buchi automaton.

    The input is normalized to negation normal form first.  Raises
    BudgetExceededError when more than ``state_budget`` tableau nodes would
    be created.
    """
    root = _expand_sugar(to_nnf(f))
    untils = _until_subformulas(root)

    nodes: dict[tuple[frozenset, frozenset], int] = {}
    node_old: list[frozenset] = []
    node_next: list[frozenset] = []
    node_incoming: list[set[int]] = []

    stack: list[_Draft] = [_Draft({_INIT}, [root], set(), set())]
    while stack:
        d = stack.pop()
        if d.new:
            eta = d.new.pop()
            if eta in d.old or isinstance(eta, TrueF):
                stack.append(d)
            elif isinstance(eta, FalseF):
                pass  # contradictory branch
            elif isinstance(eta, Atom) or (isinstance(eta, Not) and isinstance(eta.child, Atom)):
                negation = eta.child if isinstance(eta, Not) else Not(eta)
                if negation in d.old:
                    pass
                else:
                    d.old.add(eta)
                    stack.append(d)
            elif isinstance(eta, And):
                d.old.add(eta)
                d.new.extend(c for c in eta.children if c not in d.old)
                stack.append(d)
            elif isinstance(eta, Or):
                d.old.add(eta)
                for c in reversed(eta.children):
                    branch = d.clone()
                    if c not in branch.old:
                        branch.new.append(c)
                    stack.append(branch)
            elif isinstance(eta, Next):
                d.old.add(eta)
                d.nxt.add(eta.child)
                stack.append(d)
            elif isinstance(eta, Until):
                d.old.add(eta)
                fulfil = d.clone()
                if eta.right not in fulfil.old:
                    fulfil.new.append(eta.right)
                defer = d.clone()
                if eta.left not in defer.old:
                    defer.new.append(eta.left)
                defer.nxt.add(eta)
                stack.append(defer)
                stack.append(fulfil)
            elif isinstance(eta, Release):
                d.old.add(eta)
                fulfil = d.clone()
                for part in (eta.left, eta.right):
                    if part not in fulfil.old:
                        fulfil.new.append(part)
                defer = d.clone()
                if eta.right not in defer.old:
                    defer.new.append(eta.right)
                defer.nxt.add(eta)
                stack.append(defer)
                stack.append(fulfil)
            else:
                raise TypeError(f"unsupported formula in tableau: {eta!r}")
            continue

        key = (frozenset(d.old), frozenset(d.nxt))
        existing = nodes.get(key)
        if existing is not None:
            node_incoming[existing] |= d.incoming
            continue
        if len(node_old) >= state_budget:
            raise BudgetExceededError(
                f"tableau exceeded {state_budget} nodes while translating")
        nid = len(node_old)
        nodes[key] = nid
        node_old.append(key[0])
        node_next.append(key[1])
        node_incoming.append(set(d.incoming))
        stack.append(_Draft({nid}, sorted(key[1], key=repr), set(), set()))

    n = len(node_old)
    labels: list[tuple[frozenset[AtomicProp], frozenset[AtomicProp]]] = []
    for old in node_old:
        mt = frozenset(g.prop for g in old if isinstance(g, Atom))
        mf = frozenset(g.child.prop for g in old
                       if isinstance(g, Not) and isinstance(g.child, Atom))
        labels.append((mt, mf))

    transitions = []
    initial = set()
    for dst in range(n):
        for src in sorted(node_incoming[dst]):
            if src == _INIT:
                initial.add(dst)
            else:
                mt, mf = labels[src]
                transitions.append(NbaTransition(src, mt, mf, dst))

    acc_sets = tuple(
        frozenset(i for i in range(n)
                  if u not in node_old[i] or u.right in node_old[i])
        for u in untils
    )
    gba = Gba(n, frozenset(initial), tuple(transitions), acc_sets)
    return _prune_unreachable(gba)


def _prune_unreachable(gba: Gba) -> Gba:
    reach = set(gba.initial)
    frontier = list(gba.initial)
    while frontier:
        s = frontier.pop()
        for t in gba.successors[s]:
            if t.dst not in reach:
                reach.add(t.dst)
                frontier.append(t.dst)
    if len(reach) == gba.n_states:
        return gba
    order = sorted(reach)
    remap = {old: new for new, old in enumerate(order)}
    return Gba(
        n_states=len(order),
        initial=frozenset(remap[s] for s in gba.initial),
        transitions=tuple(
            NbaTransition(remap[t.src], t.must_true, t.must_false, remap[t.dst])
            for t in gba.transitions if t.src in reach and t.dst in reach
        ),
        acc_sets=tuple(frozenset(remap[s] for s in fs if s in reach)
                       for fs in gba.acc_sets),
    )


def degeneralize(gba: Gba) -> Nba:
    """Collapse generalized acceptance to a single set with a round counter."""
    k = len(gba.acc_sets)
    if k == 0:
        return Nba(gba.n_states, gba.initial,
                   frozenset(range(gba.n_states)), gba.transitions)
    if k == 1:
        return Nba(gba.n_states, gba.initial, gba.acc_sets[0], gba.transitions)

    def sid(state: int, level: int) -> int:
        return state * k + level

    transitions = []
    for t in gba.transitions:
        for level in range(k):
            nxt = (level + 1) % k if t.src in gba.acc_sets[level] else level
            transitions.append(
                NbaTransition(sid(t.src, level), t.must_true, t.must_false,
                              sid(t.dst, nxt)))
    accepting = frozenset(sid(s, 0) for s in gba.acc_sets[0])
    initial = frozenset(sid(s, 0) for s in gba.initial)
    return Nba(gba.n_states * k, initial, accepting, tuple(transitions))


def translate_to_nba(f: LtlFormula, state_budget: int = 100_000) -> Nba:
    """LTL to Buchi: accepts exactly the infinite words satisfying ``f``."""
    return degeneralize(translate_to_gba(f, state_budget))


# ---------------------------------------------------------------------------
# lasso acceptance

def _letter_matrices(nba: Nba | Gba, letters: Iterable[frozenset[AtomicProp]],
                     accepting: frozenset[int]):
    n = nba.n_states
    mats = {}
    for letter in letters:
        if letter in mats:
            continue
        step = np.zeros((n, n), dtype=np.uint8)
        for t in nba.transitions:
            if t.admits(letter):
                step[t.src, t.dst] = 1
        marked = np.zeros_like(step)
        for s in accepting:
            marked[s, :] = step[s, :]
        mats[letter] = (step, marked)
    return mats


def _compose(a, b):
    (a_any, a_mark), (b_any, b_mark) = a, b
    any_ = (a_any @ b_any > 0).astype(np.uint8)
    mark = ((a_any @ b_mark + a_mark @ b_any) > 0).astype(np.uint8)
    return any_, mark


def nba_accepts_lasso(nba: Nba, prefix: Word, suffix: Word) -> bool:
    """Whether some run over prefix . suffix^omega visits acceptance
    infinitely often (decided on the finite lasso product)."""
    if not suffix:
        raise ValueError("suffix must be nonempty")
    if not nba.initial or nba.n_states == 0:
        return False
    pre = [frozenset(w) for w in prefix]
    suf = [frozenset(w) for w in suffix]
    mats = _letter_matrices(nba, pre + suf, nba.accepting)

    n = nba.n_states
    reach = np.zeros(n, dtype=np.uint8)
    reach[list(nba.initial)] = 1
    for w in pre:
        reach = (reach @ mats[w][0] > 0).astype(np.uint8)
        if not reach.any():
            return False

    period = mats[suf[0]]
    for w in suf[1:]:
        period = _compose(period, mats[w])

    # states reachable after any number of whole periods
    while True:
        nxt = ((reach | (reach @ period[0] > 0)) > 0).astype(np.uint8)
        if np.array_equal(nxt, reach):
            break
        reach = nxt

    # closure of the period relation over one or more repetitions
    closure = period
    while True:
        any_, mark = _compose(closure, period)
        new = ((closure[0] | any_) > 0).astype(np.uint8), ((closure[1] | mark) > 0).astype(np.uint8)
        if np.array_equal(new[0], closure[0]) and np.array_equal(new[1], closure[1]):
            break
        closure = new

    marked_cycle = np.diagonal(closure[1]).astype(bool)
    return bool((reach.astype(bool) & marked_cycle).any())


# ---------------------------------------------------------------------------
# serialization

def nba_to_json(nba: Nba) -> dict:
    return {
        "states": nba.n_states,
        "initial": sorted(nba.initial),
        "accepting": sorted(nba.accepting),
        "transitions": [
            {
                "from": t.src,
                "must_true": sorted(p.name for p in t.must_true),
                "must_false": sorted(p.name for p in t.must_false),
                "to": t.dst,
            }
            for t in nba.transitions
        ],
    }


_LINK_NAME = re.compile(r"^e_(\d+)_(\d+)$")
_NODE_NAME = re.compile(r"^c_(\d+)$")


def prop_from_name(name: str) -> AtomicProp:
    m = _LINK_NAME.match(name)
    if m:
        return link_prop(int(m.group(1)), int(m.group(2)))
    m = _NODE_NAME.match(name)
    if m:
        return node_prop(int(m.group(1)))
    raise ValueError(f"unrecognized proposition name {name!r}")


def nba_from_json(doc: dict) -> Nba:
    return Nba(
        n_states=doc["states"],
        initial=frozenset(doc["initial"]),
        accepting=frozenset(doc["accepting"]),
        transitions=tuple(
            NbaTransition(
                rec["from"],
                frozenset(prop_from_name(p) for p in rec["must_true"]),
                frozenset(prop_from_name(p) for p in rec["must_false"]),
                rec["to"],
            )
            for rec in doc["transitions"]
        ),
    )
