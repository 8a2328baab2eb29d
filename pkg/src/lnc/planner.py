"""Centralized schedule synthesis: product construction and optimal lasso search.

The search space is the product of the joint activation system with an
automaton for the specification.  A plan is a lasso: a cheapest path from
the initial state to an anchor plus a cheapest cycle back to the anchor
whose visited states jointly satisfy every acceptance obligation.  Anchors
are not restricted to accepting states: for prefix+period costs the optimal
cycle may pass its accepting states mid-loop, so the search tracks the set
of obligations discharged since the anchor instead.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .buchi import Gba, Nba, translate_to_gba
from .errors import BudgetExceededError, InfeasibleError
from .ltl import (
    Always,
    And,
    Atom,
    Eventually,
    LtlFormula,
    build_fairness,
    build_phi,
    conj,
    eval_lasso,
    item_prop,
    link_prop,
    link_word,
    to_nnf,
)
from .network import SensorNetwork
from .ts import (
    CostFn,
    JaccardCost,
    ProductTs,
    Schedule,
    activation_product,
    build_product_ts,
    interference_conflicts,
)


# ---------------------------------------------------------------------------
# strongly connected components (iterative Tarjan)

@dataclass(frozen=True)
class Condensation:
    components: tuple[tuple[Hashable, ...], ...]  # topological order
    comp_of: dict[Hashable, int]
    edges: frozenset[tuple[int, int]]


def scc_decompose(adj: Mapping[Hashable, Iterable[Hashable]]) -> Condensation:
    """Condensation of a digraph given as an adjacency mapping.

    Components are numbered in topological order of the condensation;
    numbering is deterministic for a fixed node/successor order.
    """
    index: dict[Hashable, int] = {}
    low: dict[Hashable, int] = {}
    on_stack: set[Hashable] = set()
    stack: list[Hashable] = []
    comps: list[tuple[Hashable, ...]] = []
    comp_of: dict[Hashable, int] = {}
    counter = 0

    for root in adj:
        if root in index:
            continue
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(adj[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(tuple(comp))

    comps.reverse()  # Tarjan emits reverse-topological order
    for cid, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = cid
    cedges = frozenset(
        (comp_of[v], comp_of[w])
        for v in adj for w in adj[v] if comp_of[v] != comp_of[w]
    )
    return Condensation(tuple(comps), comp_of, cedges)


# ---------------------------------------------------------------------------
# product of activation system and automaton

@dataclass
class PbaGraph:
    """Explicit product graph searched by the planner.

    ``masks`` holds the activation-system state per product state; ``acc``
    holds, per product state, the bitmask of acceptance sets the state
    contributes to.  The transition relation is stored as adjacency lists.
    """

    pts: ProductTs
    masks: list[int]
    adj: list[list[int]]
    initial: list[int]
    acc: list[int]
    n_acc: int
    payload: list[tuple] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.masks)

    def observation(self, i: int) -> frozenset:
        return self.pts.observation(self.masks[i])


def build_pba(pts: ProductTs, automaton: Nba | Gba, state_budget: int = 10**6) -> PbaGraph:
    """On-the-fly synchronized product, reachable states only.

    An automaton transition is taken while the activation system sits in a
    state whose observation is consistent with the transition's label
    (must-true contained in it, must-false disjoint from it).
    """
    acc_sets = automaton.acc_sets
    n_acc = len(acc_sets)
    obs = {m: frozenset(item_prop(x) for x in pts.observation(m)) for m in pts.states}
    state_ids: dict[tuple[int, int], int] = {}
    masks: list[int] = []
    payload: list[tuple] = []
    acc: list[int] = []
    order: list[tuple[int, int]] = []

    def intern(q: int, s: int) -> int:
        key = (q, s)
        idx = state_ids.get(key)
        if idx is None:
            if len(masks) >= state_budget:
                raise BudgetExceededError(
                    f"product exceeded {state_budget} states")
            idx = len(masks)
            state_ids[key] = idx
            masks.append(q)
            payload.append(key)
            acc.append(sum(1 << b for b, fs in enumerate(acc_sets) if s in fs))
            order.append(key)
        return idx

    initial = [intern(pts.initial, s) for s in sorted(automaton.initial)]
    adj: list[list[int]] = []
    frontier = list(range(len(masks)))
    while frontier:
        next_frontier: list[int] = []
        for idx in frontier:
            q, s = payload[idx]
            letter = obs[q]
            targets = sorted({t.dst for t in automaton.successors[s] if t.admits(letter)})
            row: list[int] = []
            for q2 in pts.states:
                for s2 in targets:
                    before = len(masks)
                    j = intern(q2, s2)
                    if j >= before:
                        next_frontier.append(j)
                    row.append(j)
            while len(adj) <= idx:
                adj.append([])
            adj[idx] = row
        frontier = next_frontier
    while len(adj) < len(masks):
        adj.append([])
    return PbaGraph(pts, masks, adj, initial, acc, n_acc, payload)


def liveness_pba(pts: ProductTs, state_budget: int = 10**6) -> PbaGraph:
    """Product for the pure liveness requirement (every item infinitely
    often) with the safety part carried structurally by the state space.

    The automaton component is trivial: acceptance set ``i`` is hit exactly
    at the states activating item ``i``, so the product equals the
    activation system itself.
    """
    if len(pts.states) > state_budget:
        raise BudgetExceededError(f"product exceeded {state_budget} states")
    n = len(pts.states)
    every = list(range(n))
    acc = []
    for mask in pts.states:
        acc.append(mask)  # item bit i active exactly when obligation i is met
    return PbaGraph(
        pts=pts,
        masks=list(pts.states),
        adj=[list(every) for _ in range(n)],
        initial=[pts.state_index[pts.initial]],
        acc=acc,
        n_acc=len(pts.items),
        payload=[(m,) for m in pts.states],
    )


# ---------------------------------------------------------------------------
# optimal lasso search

@dataclass
class LassoPlan:
    schedule: Schedule
    cost: float
    anchor: int
    prefix_states: list[int]
    cycle_states: list[int]
    pba_states: int
    accepting_states: int
    sccs: int


def _dijkstra(n: int, adj: Sequence[Sequence[int]], sources: Sequence[int],
              weight: Callable[[int, int], float]):
    dist: list[tuple[float, int] | None] = [None] * n
    parent: list[int] = [-1] * n
    heap: list[tuple[float, int, int]] = []
    for s in sources:
        dist[s] = (0.0, 0)
        heapq.heappush(heap, (0.0, 0, s))
    while heap:
        d, hops, v = heapq.heappop(heap)
        cur = dist[v]
        if cur is None or (d, hops) > cur:
            continue
        for w in adj[v]:
            cand = (d + weight(v, w), hops + 1)
            old = dist[w]
            if old is None or cand < old:
                dist[w] = cand
                parent[w] = v
                heapq.heappush(heap, (cand[0], cand[1], w))
    return dist, parent


def find_optimal_lasso(pba: PbaGraph, cost: CostFn,
                       search_budget: int = 10**6) -> LassoPlan:
    """Minimum prefix-plus-period cost accepting lasso.

    Stage one is a multi-source shortest path from the initial states;
    stage two, per anchor in ascending prefix cost, a shortest cycle back
    to the anchor over (state, obligations-discharged) pairs.  Anchors are
    pre-filtered by condensation: a cycle can only live inside the anchor's
    strongly connected component, which must offer every acceptance set.

    The worst-case cycle-search space is states x 2^obligations; exceeding
    ``search_budget`` raises before any search starts, so oversized
    instances fail fast instead of grinding.
    """
    if not pba.initial:
        raise InfeasibleError("empty product: the specification admits no run")
    n = pba.n
    if pba.n_acc < 64 and n * (1 << pba.n_acc) > search_budget:
        raise BudgetExceededError(
            f"lasso search space {n} x 2^{pba.n_acc} exceeds budget {search_budget}")
    if pba.n_acc >= 64:
        raise BudgetExceededError(
            f"{pba.n_acc} acceptance obligations exceed any tractable search budget")
    obs_cost: dict[tuple[int, int], float] = {}

    def weight(i: int, j: int) -> float:
        key = (pba.masks[i], pba.masks[j])
        w = obs_cost.get(key)
        if w is None:
            w = cost(pba.pts.observation(key[0]), pba.pts.observation(key[1]))
            obs_cost[key] = w
        return w

    dist_pre, parent_pre = _dijkstra(n, pba.adj, pba.initial, weight)

    cond = scc_decompose({i: pba.adj[i] for i in range(n)})
    full = (1 << pba.n_acc) - 1
    comp_acc = [0] * len(cond.components)
    comp_cyclic = [False] * len(cond.components)
    for cid, comp in enumerate(cond.components):
        for v in comp:
            comp_acc[cid] |= pba.acc[v]
        comp_cyclic[cid] = len(comp) > 1 or any(v in pba.adj[v] for v in comp)

    anchors = [
        v for v in range(n)
        if dist_pre[v] is not None
        and comp_cyclic[cond.comp_of[v]]
        and comp_acc[cond.comp_of[v]] & full == full
    ]
    anchors.sort(key=lambda v: (dist_pre[v], v))

    best = None  # (J, suffix_len, prefix_len, anchor, cycle_parent_map, cycle_key)
    for a in anchors:
        d_a = dist_pre[a][0]
        if best is not None and d_a > best[0]:
            break
        bound = None if best is None else best[0] - d_a
        cid = cond.comp_of[a]
        start_mask = pba.acc[a]
        dist_cyc: dict[tuple[int, int], tuple[float, int]] = {}
        parent_cyc: dict[tuple[int, int], tuple[int, int] | None] = {}
        # pareto frontier per state: entries with more obligations at no
        # greater (cost, hops) dominate, so dominated pairs are never pushed
        frontier: dict[int, list[tuple[int, float, int]]] = {}

        def dominated(v: int, m: int, cand: tuple[float, int]) -> bool:
            for fm, fd, fh in frontier.get(v, ()):
                if fm & m == m and (fd, fh) <= cand:
                    return True
            return False

        def push(v: int, m: int, cand: tuple[float, int], origin) -> None:
            key = (v, m)
            old = dist_cyc.get(key)
            if old is not None and cand >= old:
                return
            if dominated(v, m, cand):
                return
            dist_cyc[key] = cand
            parent_cyc[key] = origin
            entries = frontier.setdefault(v, [])
            entries[:] = [e for e in entries
                          if not (m & e[0] == e[0] and (cand[0], cand[1]) <= (e[1], e[2]))]
            entries.append((m, cand[0], cand[1]))
            heapq.heappush(heap, (cand[0], cand[1], v, m))

        heap: list[tuple[float, int, int, int]] = []
        for v in pba.adj[a]:
            if cond.comp_of[v] == cid:
                push(v, start_mask | pba.acc[v], (weight(a, v), 1), None)
        goal = None
        while heap:
            d, hops, v, m = heapq.heappop(heap)
            cur = dist_cyc.get((v, m))
            if cur is None or (d, hops) > cur:
                continue
            if bound is not None and d > bound:
                continue
            if v == a and m == full:
                goal = (d, hops)
                break
            for w in pba.adj[v]:
                if cond.comp_of[w] != cid:
                    continue
                push(w, m | pba.acc[w], (d + weight(v, w), hops + 1), (v, m))
        if goal is None:
            continue
        j_total = d_a + goal[0]
        prefix_len = dist_pre[a][1] + 1
        candidate = (j_total, goal[1], prefix_len, a)
        if best is None or candidate < best[:4]:
            best = (*candidate, dict(parent_cyc))

    if best is None:
        raise InfeasibleError("no accepting cycle is reachable")

    j_total, suffix_len, _, anchor, parent_cyc = best
    prefix_states = [anchor]
    v = anchor
    while parent_pre[v] != -1:
        v = parent_pre[v]
        prefix_states.append(v)
    prefix_states.reverse()

    cycle_states = []
    key = (anchor, full)
    while key is not None:
        cycle_states.append(key[0])
        key = parent_cyc[key]
    cycle_states.reverse()  # first cycle step ... anchor

    schedule = Schedule(
        prefix=tuple(pba.observation(i) for i in prefix_states),
        suffix=tuple(pba.observation(i) for i in cycle_states),
    )
    accepting_states = sum(1 for m in pba.acc if m) if pba.n_acc else pba.n
    return LassoPlan(
        schedule=schedule,
        cost=j_total,
        anchor=anchor,
        prefix_states=prefix_states,
        cycle_states=cycle_states,
        pba_states=pba.n,
        accepting_states=accepting_states,
        sccs=len(cond.components),
    )


# ---------------------------------------------------------------------------
# end-to-end planners

def _liveness_formula(items: Sequence, atom: Callable) -> LtlFormula:
    return conj([Always(Eventually(Atom(atom(item)))) for item in items])


def plan_activation(
    items: Sequence[Hashable],
    conflicts: Iterable[tuple[Hashable, Hashable]],
    cost: CostFn | None = None,
    state_budget: int = 10**6,
) -> tuple[Schedule, dict]:
    """Optimal activation lasso for arbitrary items under pairwise conflicts:
    conflict-free states only, every item activated infinitely often."""
    cost = cost or JaccardCost()
    t0 = time.perf_counter()
    pts = activation_product(items, conflicts, "non_interfering", state_budget)
    pba = liveness_pba(pts, state_budget)
    plan = find_optimal_lasso(pba, cost, search_budget=state_budget)
    report = {
        "pba_states": plan.pba_states,
        "accepting": plan.accepting_states,
        "sccs": plan.sccs,
        "cost": plan.cost,
        "wallclock_ms": (time.perf_counter() - t0) * 1e3,
        "mode": "structural",
    }
    return plan.schedule, report


def plan_centralized(
    net: SensorNetwork,
    cost: CostFn | None = None,
    mode: str = "structural",
    state_budget: int = 10**6,
    nba_budget: int = 100_000,
    fairness: bool = False,
    verify: bool = True,
) -> tuple[Schedule, dict]:
    """Optimal schedule for the whole network.

    Modes:
      * ``structural`` (default): conflict-free state space, liveness
        obligations tracked directly.  Scales furthest.
      * ``tableau``: conflict-free state space, liveness formula translated
        through the tableau to a generalized Buchi automaton.
      * ``faithful``: complete state space and the full specification
        formula through the tableau.  Exponential twice over; small
        networks only.

    ``fairness`` conjoins the per-link fairness requirement (opt-in, forces
    the faithful pipeline).
    """
    cost = cost or JaccardCost()
    t0 = time.perf_counter()
    edges = net.sorted_edges()
    spec_formula = build_phi(net)
    if fairness:
        chi = [build_fairness(net, e) for e in edges if len(net.link_neighborhood(e)) > 1]
        spec_formula = And((spec_formula, conj(chi))) if chi else spec_formula
        mode = "faithful"

    if mode == "structural":
        pts = build_product_ts(net, "non_interfering", state_budget)
        pba = liveness_pba(pts, state_budget)
    elif mode == "tableau":
        pts = build_product_ts(net, "non_interfering", state_budget)
        gba = translate_to_gba(_liveness_formula(edges, lambda e: link_prop(*e)), nba_budget)
        pba = build_pba(pts, gba, state_budget)
    elif mode == "faithful":
        pts = build_product_ts(net, "complete", state_budget)
        gba = translate_to_gba(to_nnf(spec_formula), nba_budget)
        pba = build_pba(pts, gba, state_budget)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    plan = find_optimal_lasso(pba, cost, search_budget=state_budget)
    elapsed = (time.perf_counter() - t0) * 1e3
    if verify and not eval_lasso(
        spec_formula, link_word(plan.schedule.prefix), link_word(plan.schedule.suffix)
    ):
        raise RuntimeError("internal error: planned schedule fails its specification")
    report = {
        "pba_states": plan.pba_states,
        "accepting": plan.accepting_states,
        "sccs": plan.sccs,
        "cost": plan.cost,
        "wallclock_ms": elapsed,
        "mode": mode,
    }
    return plan.schedule, report


def plan_specialized_lnc(
    net: SensorNetwork,
    cost: CostFn | None = None,
    state_budget: int = 10**6,
) -> tuple[Schedule, dict]:
    """Minimum-cost covering cycle over the conflict-free state space.

    Independent of the product search: enumerates anchors from the
    all-inactive state and runs a bitmask Dijkstra over (state, edges
    covered since the anchor).  Always feasible: the one-edge-at-a-time
    cycle is a witness.
    """
    cost = cost or JaccardCost()
    t0 = time.perf_counter()
    pts = build_product_ts(net, "non_interfering", state_budget)
    masks = list(pts.states)
    m_index = {m: i for i, m in enumerate(masks)}
    n = len(masks)
    if len(pts.items) >= 64 or n * (1 << len(pts.items)) > state_budget:
        raise BudgetExceededError(
            f"covering search space {n} x 2^{len(pts.items)} exceeds budget {state_budget}")
    full = (1 << len(pts.items)) - 1
    pair: dict[tuple[int, int], float] = {}

    def w(a: int, b: int) -> float:
        key = (a, b)
        val = pair.get(key)
        if val is None:
            val = cost(pts.observation(a), pts.observation(b))
            pair[key] = val
        return val

    # stage 1: cheapest way from the all-inactive state to every state
    dist0: list[tuple[float, int] | None] = [None] * n
    par0 = [-1] * n
    dist0[m_index[0]] = (0.0, 0)
    heap: list[tuple[float, int, int]] = [(0.0, 0, m_index[0])]
    while heap:
        d, hops, i = heapq.heappop(heap)
        if dist0[i] is None or (d, hops) > dist0[i]:
            continue
        for j in range(n):
            cand = (d + w(masks[i], masks[j]), hops + 1)
            if dist0[j] is None or cand < dist0[j]:
                dist0[j] = cand
                par0[j] = i
                heapq.heappush(heap, (cand[0], cand[1], j))

    order = sorted(range(n), key=lambda i: (dist0[i], i))
    best = None  # (J, suffix_len, prefix_len, anchor_idx, parents)
    for ai in order:
        d_a = dist0[ai][0]
        if best is not None and d_a > best[0]:
            break
        a = masks[ai]
        seen: dict[tuple[int, int], tuple[float, int]] = {}
        par: dict[tuple[int, int], tuple[int, int] | None] = {}
        pareto: dict[int, list[tuple[int, float, int]]] = {}
        heap2: list[tuple[float, int, int, int]] = []

        def push2(j: int, covered: int, cand: tuple[float, int], origin) -> None:
            key = (j, covered)
            old = seen.get(key)
            if old is not None and cand >= old:
                return
            for fm, fd, fh in pareto.get(j, ()):
                if fm & covered == covered and (fd, fh) <= cand:
                    return
            seen[key] = cand
            par[key] = origin
            entries = pareto.setdefault(j, [])
            entries[:] = [e for e in entries
                          if not (covered & e[0] == e[0] and (cand[0], cand[1]) <= (e[1], e[2]))]
            entries.append((covered, cand[0], cand[1]))
            heapq.heappush(heap2, (cand[0], cand[1], j, covered))

        for j in range(n):
            push2(j, a | masks[j], (w(a, masks[j]), 1), None)
        goal = None
        bound = None if best is None else best[0] - d_a
        while heap2:
            d, hops, j, covered = heapq.heappop(heap2)
            if seen.get((j, covered)) != (d, hops):
                continue
            if bound is not None and d > bound:
                continue
            if j == ai and covered == full:
                goal = (d, hops)
                break
            for k in range(n):
                push2(k, covered | masks[k], (d + w(masks[j], masks[k]), hops + 1), (j, covered))
        if goal is None:
            continue
        candidate = (d_a + goal[0], goal[1], dist0[ai][1] + 1, ai)
        if best is None or candidate < best[:4]:
            best = (*candidate, dict(par))

    if best is None:  # unreachable: the sequential cycle always exists
        raise InfeasibleError("no covering cycle found")

    j_total, _, _, ai, parents = best
    prefix_idx = [ai]
    v = ai
    while par0[v] != -1:
        v = par0[v]
        prefix_idx.append(v)
    prefix_idx.reverse()
    cycle_idx = []
    key = (ai, full)
    while key is not None:
        cycle_idx.append(key[0])
        key = parents[key]
    cycle_idx.reverse()

    schedule = Schedule(
        prefix=tuple(pts.observation(masks[i]) for i in prefix_idx),
        suffix=tuple(pts.observation(masks[i]) for i in cycle_idx),
    )
    if not eval_lasso(build_phi(net), link_word(schedule.prefix), link_word(schedule.suffix)):
        raise RuntimeError("internal error: planned schedule fails its specification")
    report = {
        "pba_states": n,
        "accepting": n,
        "sccs": 1,
        "cost": j_total,
        "wallclock_ms": (time.perf_counter() - t0) * 1e3,
        "mode": "specialized",
    }
    return schedule, report
