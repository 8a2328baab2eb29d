"""Brute-force ground truth for small instances.

Exhaustively enumerates bounded prefix/suffix schedules, keeps those whose
lasso satisfies the specification under the semantic evaluator, and
reports the cheapest.  Deliberately slow and independent of the planner's
search; also hosts the exhaustive translation checker.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from .buchi import Nba, nba_accepts_lasso, translate_to_nba
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
    Always,
    atoms_of,
    build_phi,
    eval_lasso,
    link_word,
    render,
)
from .network import SensorNetwork
from .ts import CostFn, JaccardCost, Schedule, plan_cost

MAX_ORACLE_EDGES = 4


def _independent_subsets(net: SensorNetwork) -> list[frozenset]:
    """All conflict-free edge subsets, smallest first (own enumeration,
    shared with nothing in the planner)."""
    edges = net.sorted_edges()
    subsets = [frozenset()]
    for k in range(1, len(edges) + 1):
        for combo in combinations(edges, k):
            ok = True
            for a, b in combinations(combo, 2):
                if set(a) & set(b):
                    ok = False
                    break
            if ok:
                subsets.append(frozenset(combo))
    return subsets


@dataclass
class LassoEnumeration:
    """Exhaustive, duplicate-free iterator over bounded schedules.

    Words start from the all-inactive state and close their loop: the
    suffix's last element equals the prefix's last (matching how planner
    lassos wrap), so every physically executed transition is charged.
    Interfering subsets are pruned up front — they falsify the mutual
    exclusion requirement immediately.
    """

    net: SensorNetwork
    max_prefix: int = 2
    max_suffix: int = 4
    subsets: list[frozenset] = field(init=False)

    def __post_init__(self):
        if self.max_prefix < 1 or self.max_suffix < 1:
            raise ValueError("bounds must be at least 1")
        self.subsets = _independent_subsets(self.net)

    def __iter__(self) -> Iterator[tuple[tuple[frozenset, ...], tuple[frozenset, ...]]]:
        empty = frozenset()
        for plen in range(1, self.max_prefix + 1):
            for tail in product(self.subsets, repeat=plen - 1):
                prefix = (empty, *tail)
                anchor = prefix[-1]
                for slen in range(1, self.max_suffix + 1):
                    for body in product(self.subsets, repeat=slen - 1):
                        yield prefix, (*body, anchor)


def brute_force_optimal(
    net: SensorNetwork,
    cost: CostFn | None = None,
    max_prefix: int = 2,
    max_suffix: int = 4,
) -> Schedule | None:
    """Cheapest bounded schedule satisfying the specification, or None.

    Enforces the small-instance guard (the enumeration is exponential).
    Ground truth for planner optimality checks; shares no search code with
    the planner.
    """
    if len(net.edges) > MAX_ORACLE_EDGES:
        raise ValueError(
            f"brute force is limited to {MAX_ORACLE_EDGES} edges, "
            f"got {len(net.edges)}")
    cost = cost or JaccardCost()
    phi = build_phi(net)
    best: tuple[float, int, int, str] | None = None
    best_schedule: Schedule | None = None
    for prefix, suffix in LassoEnumeration(net, max_prefix, max_suffix):
        if not eval_lasso(phi, link_word(prefix), link_word(suffix)):
            continue
        schedule = Schedule(prefix, suffix)
        key = (
            plan_cost(schedule, cost),
            len(suffix),
            len(prefix),
            repr((prefix, suffix)),
        )
        if best is None or key < best:
            best = key
            best_schedule = schedule
    return best_schedule


# ---------------------------------------------------------------------------
# translation checking

@dataclass
class TranslationReport:
    formula: LtlFormula
    lassos_checked: int
    disagreements: list[tuple[tuple, tuple, bool, bool]]

    @property
    def ok(self) -> bool:
        return not self.disagreements


def verify_translation(
    f: LtlFormula,
    max_props: int = 2,
    max_len: int = 3,
    nba: Nba | None = None,
    state_budget: int = 100_000,
) -> TranslationReport:
    """Compare automaton acceptance against the semantic evaluator over
    every lasso within the length bound.

    Passing an explicit ``nba`` checks that automaton instead of a fresh
    translation (useful for mutation tests).
    """
    props = sorted(atoms_of(f))
    if len(props) > max_props:
        raise ValueError(f"formula has {len(props)} propositions, limit {max_props}")
    if nba is None:
        nba = translate_to_nba(f, state_budget)
    letters = [frozenset(c) for k in range(len(props) + 1)
               for c in combinations(props, k)]
    disagreements = []
    checked = 0
    for plen in range(0, max_len + 1):
        for prefix in product(letters, repeat=plen):
            for slen in range(1, max_len + 1):
                for suffix in product(letters, repeat=slen):
                    expected = eval_lasso(f, prefix, suffix)
                    got = nba_accepts_lasso(nba, prefix, suffix)
                    checked += 1
                    if expected != got:
                        disagreements.append((prefix, suffix, expected, got))
    return TranslationReport(f, checked, disagreements)


def random_formula(
    rng: np.random.Generator, props: Sequence[AtomicProp], size: int
) -> LtlFormula:
    """Random formula with at most ``size`` symbols over the given props."""
    if size <= 1:
        choice = rng.integers(0, len(props) + 2)
        if choice < len(props):
            return Atom(props[int(choice)])
        return TrueF() if choice == len(props) else FalseF()
    unary = [Not, Next, Always, Eventually]
    binary = [Until, Release]
    kind = int(rng.integers(0, 4))
    if kind == 0:
        return unary[int(rng.integers(0, len(unary)))](
            random_formula(rng, props, size - 1))
    if kind == 1:
        split = int(rng.integers(1, size - 1)) if size > 2 else 1
        op = binary[int(rng.integers(0, len(binary)))]
        return op(random_formula(rng, props, split),
                  random_formula(rng, props, size - 1 - split))
    split = int(rng.integers(1, size - 1)) if size > 2 else 1
    op = And if kind == 2 else Or
    return op((random_formula(rng, props, split),
               random_formula(rng, props, size - 1 - split)))
