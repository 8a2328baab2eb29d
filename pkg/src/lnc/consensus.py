"""Laplacian consensus over the switching graph induced by a schedule.

Each step applies ``y <- y - eps * L(t) y`` with the un-normalized graph
Laplacian of the links active at time t.  For feasible schedules (at most
one active incident link per node) this is exactly pairwise averaging with
weight eps; the matrix form also covers infeasible or external schedules,
in which case the run is flagged.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .ltl import Always, Atom, Eventually, conj, eval_lasso, link_prop, link_word
from .network import Graph, Link, SensorNetwork, connected_components
from .ts import Schedule


def _laplacian(n: int, active_edges: Iterable[Link]) -> np.ndarray:
    lap = np.zeros((n, n))
    for i, j in active_edges:
        lap[i, i] += 1.0
        lap[j, j] += 1.0
        lap[i, j] -= 1.0
        lap[j, i] -= 1.0
    return lap


def step(y: Sequence[float], active_edges: Iterable[Link], epsilon: float) -> np.ndarray:
    """One consensus update under the active link set."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    y = np.asarray(y, dtype=float)
    return y - epsilon * (_laplacian(len(y), active_edges) @ y)


def message_passing_step(
    y: Sequence[float], active_edges: Iterable[Link], epsilon: float
) -> np.ndarray:
    """Per-node form: a node with an active incident link averages with
    that one neighbor.  Only defined when no node has two active links."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    y = np.asarray(y, dtype=float)
    out = y.copy()
    partner: dict[int, int] = {}
    for i, j in active_edges:
        if i in partner or j in partner:
            raise ValueError("some node has two active incident links")
        partner[i] = j
        partner[j] = i
    for i, j in partner.items():
        out[i] = (1.0 - epsilon) * y[i] + epsilon * y[j]
    return out


def _max_active_degree(active_edges: Iterable[Link]) -> int:
    deg: dict[int, int] = {}
    for i, j in active_edges:
        deg[i] = deg.get(i, 0) + 1
        deg[j] = deg.get(j, 0) + 1
    return max(deg.values(), default=0)


@dataclass
class ConsensusTrajectory:
    states: np.ndarray  # (steps+1, N)
    epsilon: float
    schedule: Schedule
    matrix_fallback: bool  # some step had a node with two active links

    @property
    def steps(self) -> int:
        return len(self.states) - 1

    @property
    def spread(self) -> np.ndarray:
        return self.states.max(axis=1) - self.states.min(axis=1)

    @property
    def sums(self) -> np.ndarray:
        return self.states.sum(axis=1)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def final_spread(self) -> float:
        return float(self.spread[-1])

    def clusters(self, gap: float = 1e-3) -> int:
        return cluster_count(self.final, gap)


def run(
    net: SensorNetwork,
    schedule: Schedule,
    y0: Sequence[float],
    epsilon: float = 0.5,
    steps: int = 1000,
) -> ConsensusTrajectory:
    """Unroll the schedule (prefix once, then the suffix forever) for the
    given number of steps."""
    if steps < 1:
        raise ValueError("need at least one step")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    y = np.asarray(y0, dtype=float)
    if y.shape != (net.n,):
        raise ValueError(f"initial state has dimension {y.shape}, network has {net.n} nodes")
    for step_edges in (*schedule.prefix, *schedule.suffix):
        for e in step_edges:
            if e not in net.edges:
                raise ValueError(f"schedule activates unknown edge {e}")

    states = np.empty((steps + 1, net.n))
    states[0] = y
    fallback = False
    laps: dict[frozenset, np.ndarray] = {}
    for t in range(steps):
        edges = schedule.word(t)
        lap = laps.get(edges)
        if lap is None:
            lap = _laplacian(net.n, edges)
            laps[edges] = lap
            if _max_active_degree(edges) > 1:
                fallback = True
        states[t + 1] = states[t] - epsilon * (lap @ states[t])
    return ConsensusTrajectory(states, epsilon, schedule, fallback)


def basis_state(n: int, index: int = 0) -> np.ndarray:
    y = np.zeros(n)
    y[index] = 1.0
    return y


def random_state(n: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=n)


# ---------------------------------------------------------------------------
# diagnostics

def liveness_check(net: SensorNetwork, schedule: Schedule) -> bool:
    """Every edge of the network appears somewhere in the suffix."""
    return net.edges <= schedule.suffix_items()


def liveness_check_semantic(net: SensorNetwork, schedule: Schedule) -> bool:
    """Same condition through the recurrence formula on the lasso."""
    formula = conj([Always(Eventually(Atom(link_prop(*e)))) for e in net.sorted_edges()])
    return eval_lasso(formula, link_word(schedule.prefix), link_word(schedule.suffix))


def check_joint_connectivity(
    net: SensorNetwork, schedule: Schedule, window: int, max_repetitions: int = 64
) -> bool:
    """Whether every length-``window`` block of the periodic timeline
    activates a connected spanning set of links.

    Blocks are consecutive from the suffix start (the finite prefix cannot
    affect tail behaviour); the block pattern over the suffix repeats after
    lcm(window, period) steps, so examining that many suffices.
    """
    if window < 1:
        raise ValueError("window must be positive")
    period = schedule.period
    if window > period * max_repetitions:
        raise ValueError(
            f"window {window} exceeds suffix period {period} x {max_repetitions}")
    if net.n == 0:
        return True
    if len(connected_components(net.graph)) > 1:
        return False
    start = len(schedule.prefix)
    end = start + math.lcm(window, period)
    while start < end:
        union: set[Link] = set()
        for t in range(start, start + window):
            union |= schedule.word(t)
        block = Graph(net.nodes, frozenset(union))
        if len(connected_components(block)) != 1:
            return False
        start += window
    return True


def efficiency(schedule: Schedule, net: SensorNetwork) -> float:
    """Mean percentage of links active per suffix step."""
    if not net.edges:
        return 0.0
    total = sum(len(step_edges) for step_edges in schedule.suffix)
    return 100.0 * total / (len(schedule.suffix) * len(net.edges))


def cluster_count(values: Sequence[float], gap: float = 1e-3) -> int:
    """Single-linkage cluster count: values closer than ``gap`` chain up."""
    vs = sorted(float(v) for v in values)
    if not vs:
        return 0
    return 1 + sum(1 for a, b in zip(vs, vs[1:]) if b - a > gap)


# ---------------------------------------------------------------------------
# output

def write_trajectory_csv(path, traj: ConsensusTrajectory) -> None:
    n = traj.states.shape[1]
    spread = traj.spread
    sums = traj.sums
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", *(f"y_{i}" for i in range(n)), "spread", "sum"])
        for t, row in enumerate(traj.states):
            writer.writerow([t, *(repr(v) for v in row), repr(float(spread[t])), repr(float(sums[t]))])


def summary(
    traj: ConsensusTrajectory,
    net: SensorNetwork,
    tol: float = 1e-6,
    gap: float = 1e-3,
) -> dict:
    return {
        "converged": bool(traj.final_spread() < tol),
        "clusters": traj.clusters(gap),
        "final_spread": traj.final_spread(),
        "efficiency_pct": efficiency(traj.schedule, net),
    }
