"""Transition-system models of activation scheduling and their costs.

States of the product system are subsets of an item universe (communication
links, or command nodes for the upper layer), stored as bitmasks over a
canonical item order.  Under the ``non_interfering`` policy only
conflict-free subsets are states, which bakes the mutual-exclusion safety
requirement into the state space; the ``complete`` policy keeps all 2^n
subsets.  Either way there is a transition between every pair of states, so
a schedule is just a state sequence.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

from .errors import BudgetExceededError
from .network import Link, SensorNetwork, link

EdgeSet = frozenset[Link]


# ---------------------------------------------------------------------------
# single link

@dataclass(frozen=True)
class LinkTs:
    """Two-state model of one link: inactive <-> active.

    ``standby`` self-loops on both states, ``switch`` toggles; the active
    state is the one observed as the link's proposition.
    """

    edge: Link
    states: tuple[str, str] = ("inactive", "active")
    initial: str = "inactive"
    inputs: tuple[str, str] = ("standby", "switch")

    @property
    def transitions(self) -> tuple[tuple[str, str, str], ...]:
        return (
            ("inactive", "standby", "inactive"),
            ("active", "standby", "active"),
            ("inactive", "switch", "active"),
            ("active", "switch", "inactive"),
        )

    def step(self, state: str, inp: str) -> str:
        for src, label, dst in self.transitions:
            if src == state and label == inp:
                return dst
        raise KeyError((state, inp))

    def observation(self, state: str) -> frozenset[Link]:
        return frozenset({self.edge}) if state == "active" else frozenset()


def build_link_ts(e: Link) -> LinkTs:
    return LinkTs(link(*e))


# ---------------------------------------------------------------------------
# product over an item universe

@dataclass(frozen=True)
class ProductTs:
    """Joint activation system over an ordered item universe.

    ``states`` are bitmasks; the initial state is the empty set.  The
    transition relation is complete on the state set, so planners only
    enumerate states.
    """

    items: tuple[Hashable, ...]
    states: tuple[int, ...]
    policy: str
    conflicts: frozenset[tuple[int, int]]  # index pairs, i < j

    @cached_property
    def index(self) -> dict[Hashable, int]:
        return {item: i for i, item in enumerate(self.items)}

    @cached_property
    def state_index(self) -> dict[int, int]:
        return {mask: i for i, mask in enumerate(self.states)}

    @property
    def initial(self) -> int:
        return 0

    def observation(self, mask: int) -> frozenset:
        return frozenset(item for i, item in enumerate(self.items) if mask >> i & 1)

    def mask_of(self, items: Iterable[Hashable]) -> int:
        mask = 0
        for item in items:
            mask |= 1 << self.index[item]
        return mask

    def is_independent(self, mask: int) -> bool:
        return all(not (mask >> i & 1 and mask >> j & 1) for i, j in self.conflicts)


def activation_product(
    items: Sequence[Hashable],
    conflicts: Iterable[tuple[Hashable, Hashable]],
    policy: str = "non_interfering",
    state_budget: int = 10**6,
) -> ProductTs:
    """Build the joint activation system for arbitrary items.

    ``conflicts`` lists item pairs that may not be active simultaneously;
    it is only consulted under the ``non_interfering`` policy.
    """
    if policy not in ("complete", "non_interfering"):
        raise ValueError(f"unknown policy {policy!r}")
    items = tuple(items)
    index = {item: i for i, item in enumerate(items)}
    pairs = frozenset(
        (min(index[a], index[b]), max(index[a], index[b])) for a, b in conflicts
    )
    n = len(items)
    if policy == "complete":
        if 2 ** n > state_budget:
            raise BudgetExceededError(
                f"complete product needs {2 ** n} states, budget is {state_budget}")
        states = tuple(range(2 ** n))
    else:
        blockers = [0] * n  # blockers[i] = mask of items conflicting with i
        for i, j in pairs:
            blockers[i] |= 1 << j
            blockers[j] |= 1 << i
        found: list[int] = []

        def grow(mask: int, start: int) -> None:
            found.append(mask)
            if len(found) > state_budget:
                raise BudgetExceededError(
                    f"independent-set enumeration exceeded budget {state_budget}")
            for i in range(start, n):
                if not (blockers[i] & mask):
                    grow(mask | (1 << i), i + 1)

        grow(0, 0)
        states = tuple(sorted(found))
    return ProductTs(items, states, policy, pairs)


def interference_conflicts(net: SensorNetwork) -> list[tuple[Link, Link]]:
    """Pairs of distinct edges sharing an endpoint."""
    edges = net.sorted_edges()
    out = []
    for idx, e in enumerate(edges):
        for f in edges[idx + 1:]:
            if set(e) & set(f):
                out.append((e, f))
    return out


def build_product_ts(
    net: SensorNetwork,
    policy: str = "non_interfering",
    state_budget: int = 10**6,
) -> ProductTs:
    """Joint link-activation system for a sensor network."""
    return activation_product(
        net.sorted_edges(), interference_conflicts(net), policy, state_budget
    )


# ---------------------------------------------------------------------------
# costs

def jaccard_cost(a: frozenset, b: frozenset) -> float:
    """1 - |A o B| / |A u B|; zero when both sets are empty."""
    if not a and not b:
        return 0.0
    union = len(a | b)
    return 1.0 - len(a & b) / union


class JaccardCost:
    """Set-overlap transition cost; a metric on finite sets, range [0, 1]."""

    kind = "jaccard"

    def __call__(self, a: frozenset, b: frozenset) -> float:
        return jaccard_cost(a, b)


class HausdorffCost:
    """Hausdorff distance between sets of activated sensor coordinates.

    Activated coordinates are endpoints of active links.  Distance from an
    empty set to a nonempty one is the diameter of the network's bounding
    box; between two empty sets it is zero.
    """

    kind = "hausdorff"

    def __init__(self, net: SensorNetwork):
        self.net = net
        self._empty = net.diameter_bound()

    def _points(self, edges: frozenset) -> set[tuple[float, ...]]:
        pts = set()
        for i, j in edges:
            pts.add(self.net.positions[i])
            pts.add(self.net.positions[j])
        return pts

    def __call__(self, a: frozenset, b: frozenset) -> float:
        pa, pb = self._points(a), self._points(b)
        if not pa and not pb:
            return 0.0
        if not pa or not pb:
            return self._empty
        d_ab = max(min(math.dist(p, q) for q in pb) for p in pa)
        d_ba = max(min(math.dist(p, q) for q in pa) for p in pb)
        return max(d_ab, d_ba)


class TableCost:
    """Explicit transition-cost table on ordered pairs of frozensets."""

    kind = "table"

    def __init__(self, table: dict[tuple[frozenset, frozenset], float]):
        for cost in table.values():
            if cost < 0:
                raise ValueError("costs must be non-negative")
        self.table = dict(table)

    def __call__(self, a: frozenset, b: frozenset) -> float:
        try:
            return self.table[(a, b)]
        except KeyError:
            raise KeyError(f"no cost for transition {sorted(a)} -> {sorted(b)}") from None


CostFn = Callable[[frozenset, frozenset], float]


# ---------------------------------------------------------------------------
# schedules

@dataclass(frozen=True)
class Schedule:
    """Prefix/suffix (lasso) sequence of activation sets.

    The infinite word is prefix . suffix^omega.  Planner-produced schedules
    close the loop: the suffix's last element equals the prefix's last, so
    the wrap transition of the suffix is exactly the transition executed
    when the suffix repeats (and when it is first entered).
    """

    prefix: tuple[frozenset, ...]
    suffix: tuple[frozenset, ...]

    def __post_init__(self):
        if not self.suffix:
            raise ValueError("suffix must be nonempty")

    def word(self, t: int) -> frozenset:
        if t < len(self.prefix):
            return self.prefix[t]
        return self.suffix[(t - len(self.prefix)) % len(self.suffix)]

    def unroll(self, steps: int) -> list[frozenset]:
        return [self.word(t) for t in range(steps)]

    @property
    def period(self) -> int:
        return len(self.suffix)

    def active_items(self) -> frozenset:
        out: frozenset = frozenset()
        for step in (*self.prefix, *self.suffix):
            out |= step
        return out

    def suffix_items(self) -> frozenset:
        out: frozenset = frozenset()
        for step in self.suffix:
            out |= step
        return out


def sequential_schedule(net: SensorNetwork) -> Schedule:
    """Baseline lasso activating one edge per step in canonical order."""
    edges = net.sorted_edges()
    if not edges:
        return Schedule((), (frozenset(),))
    return Schedule((), tuple(frozenset({e}) for e in edges))


def cost_to_go(trace: Sequence[frozenset], cost: CostFn) -> float:
    """Summed transition cost along a finite trace (zero for singletons)."""
    if not trace:
        raise ValueError("trace must be nonempty")
    return sum(cost(trace[t - 1], trace[t]) for t in range(1, len(trace)))


def plan_cost(s: Schedule, cost: CostFn) -> float:
    """Prefix cost plus per-period suffix cost.

    The suffix charge includes the wrap transition from its last element
    back to its first, so each physically executed transition of the
    repeating period is charged exactly once.
    """
    total = cost_to_go(s.prefix, cost) if s.prefix else 0.0
    total += cost_to_go(s.suffix, cost)
    total += cost(s.suffix[-1], s.suffix[0])
    return total


# ---------------------------------------------------------------------------
# serialization (link schedules)

def schedule_to_json(s: Schedule, cost_value: float | None = None) -> dict:
    doc = {
        "prefix": [sorted([i, j] for i, j in step) for step in s.prefix],
        "suffix": [sorted([i, j] for i, j in step) for step in s.suffix],
    }
    if cost_value is not None:
        doc["cost"] = cost_value
    return doc


def schedule_from_json(doc: dict) -> Schedule:
    def steps(rows) -> tuple[frozenset, ...]:
        return tuple(frozenset(link(i, j) for i, j in step) for step in rows)

    return Schedule(steps(doc["prefix"]), steps(doc["suffix"]))


def save_schedule(path, s: Schedule, cost_value: float | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(schedule_to_json(s, cost_value), fh, indent=2)
        fh.write("\n")


def load_schedule(path) -> Schedule:
    with open(path) as fh:
        return schedule_from_json(json.load(fh))
