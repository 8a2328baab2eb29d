"""Hierarchical scheduling through a layer of command nodes.

Each command node plans optimally for the sensors inside its radius; a
top-level activation plan decides which command nodes run when (neighbors
in the command graph never simultaneously).  Stitching takes, at every
step, the union of the active command nodes' current local elements.  A
command node's position in its local plan advances only while it is
active and freezes otherwise, so every local plan is traversed in full
between consecutive activations — the key to global liveness.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import CoverageError, StitchHorizonError
from .ltl import build_phi, build_psi, eval_lasso, link_word, node_word
from .network import (
    CommandLayer,
    Graph,
    SensorNetwork,
    build_command_layer,
    connected_components,
    coverage_check,
    uncovered_edges,
)
from .planner import plan_activation
from .ts import CostFn, JaccardCost, Schedule, schedule_to_json


@dataclass
class CommandPlan:
    """Activation lasso over command nodes satisfying the exclusion and
    recurrence requirements."""

    rho: Schedule
    report: dict = field(default_factory=dict)


@dataclass
class LocalPlan:
    command: int
    subgraph: Graph
    schedule: Schedule
    report: dict = field(default_factory=dict)


@dataclass
class HierarchicalPlan:
    rho: Schedule
    local_plans: dict[int, LocalPlan]
    stitched: Schedule
    layer: CommandLayer
    report: dict = field(default_factory=dict)


def _subgraph_conflicts(g: Graph) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    edges = g.sorted_edges()
    out = []
    for idx, e in enumerate(edges):
        for f in edges[idx + 1:]:
            if set(e) & set(f):
                out.append((e, f))
    return out


def plan_command_activations(g_cmd: Graph, cost: CostFn | None = None) -> CommandPlan:
    """Optimal command-node activation lasso: adjacent nodes never active
    together, every node active infinitely often.

    Deterministic for fixed inputs, so every command node recomputing it
    from the shared topology arrives at the identical plan; no separate
    agreement round is simulated.
    """
    schedule, report = plan_activation(g_cmd.nodes, g_cmd.sorted_edges(), cost)
    return CommandPlan(schedule, report)


def _plan_for_subgraph(subgraph: Graph, cost: CostFn | None, command: int) -> LocalPlan:
    if not subgraph.edges:
        return LocalPlan(command, subgraph, Schedule((), (frozenset(),)),
                         {"pba_states": 1, "cost": 0.0})
    schedule, report = plan_activation(
        subgraph.sorted_edges(), _subgraph_conflicts(subgraph), cost)
    if not eval_lasso(build_phi(subgraph), link_word(schedule.prefix), link_word(schedule.suffix)):
        raise RuntimeError("internal error: local plan fails its specification")
    return LocalPlan(command, subgraph, schedule, report)


def plan_local(
    net: SensorNetwork,
    center: Sequence[float],
    R: float,
    cost: CostFn | None = None,
    command: int = -1,
) -> LocalPlan:
    """Optimal schedule for the sensor subgraph induced within distance R
    of one command center (constant-empty plan when it has no edges)."""
    from .network import local_subgraph

    return _plan_for_subgraph(local_subgraph(net, center, R), cost, command)


def _lasso_position(schedule: Schedule, t: int) -> int:
    p = len(schedule.prefix)
    if t < p:
        return t
    return p + (t - p) % len(schedule.suffix)


def stitch(
    rho: Schedule,
    local_plans: Mapping[int, Schedule],
    horizon: int | None = None,
) -> Schedule:
    """Interleave local plans under the command activation lasso.

    The lasso is closed at the first repeated joint configuration (position
    in the command lasso plus every frozen/advancing local position); the
    horizon caps the unrolled search and raises when the configuration
    space is too large to close.
    """
    commands = sorted(local_plans)
    pointers = {j: 0 for j in commands}
    if horizon is None:
        period_product = math.prod(
            len(local_plans[j].prefix) + len(local_plans[j].suffix) for j in commands
        )
        horizon = min(
            1_000_000,
            len(rho.prefix) + (len(rho.suffix) * max(1, period_product)) * 2 + 4,
        )

    seen: dict[tuple, int] = {}
    words: list[frozenset] = []
    t = 0
    while t <= horizon:
        config = (
            _lasso_position(rho, t),
            tuple(_lasso_position(local_plans[j], pointers[j]) for j in commands),
        )
        first = seen.get(config)
        if first is not None:
            return Schedule(tuple(words[:first]), tuple(words[first:t]))
        seen[config] = t
        active = rho.word(t)
        step: frozenset = frozenset()
        for j in commands:
            if j in active:
                step |= local_plans[j].word(pointers[j])
                pointers[j] += 1
        words.append(step)
        t += 1
    raise StitchHorizonError(
        f"stitched lasso did not close within horizon {horizon}")


def merge_schedules(schedules: Sequence[Schedule]) -> Schedule:
    """Pointwise union of lassos (used across independent command-graph
    components); period is the lcm of the parts."""
    if not schedules:
        return Schedule((), (frozenset(),))
    if len(schedules) == 1:
        return schedules[0]
    p = max(len(s.prefix) for s in schedules)
    period = math.lcm(*(len(s.suffix) for s in schedules))

    def union_at(t: int) -> frozenset:
        out: frozenset = frozenset()
        for s in schedules:
            out |= s.word(t)
        return out

    prefix = tuple(union_at(t) for t in range(p))
    suffix = tuple(union_at(t) for t in range(p, p + period))
    return Schedule(prefix, suffix)


def plan_hlnc(
    net: SensorNetwork,
    centers: Sequence[Sequence[float]],
    R: float,
    cost: CostFn | None = None,
    horizon: int | None = None,
    state_budget: int = 10**6,
) -> HierarchicalPlan:
    """Full hierarchical pipeline: coverage certificate, per-component
    command plans, local plans, stitching, and a feasibility audit.

    Refuses to plan when the coverage condition fails (some link might
    escape every command subgraph)."""
    cost = cost or JaccardCost()
    t0 = time.perf_counter()
    eps = coverage_check(net, centers, R)
    if eps is None:
        missing = uncovered_edges(net, centers, R)
        raise CoverageError(
            "command placement fails the coverage condition"
            + (f"; uncovered edges: {missing}" if missing else
               " (margin over the communication radius is not positive)"),
            uncovered=missing,
        )
    layer = build_command_layer(net, centers, R)
    t_cover = time.perf_counter()

    local_plans: dict[int, LocalPlan] = {}
    component_rhos: list[Schedule] = []
    component_stitched: list[Schedule] = []
    rho_reports = []
    for comp in connected_components(layer.cmd_graph):
        comp_graph = layer.cmd_graph.induced(comp)
        cmd_plan = plan_command_activations(comp_graph, cost)
        rho_reports.append(cmd_plan.report)
        if not eval_lasso(
            build_psi(comp_graph),
            node_word(cmd_plan.rho.prefix),
            node_word(cmd_plan.rho.suffix),
        ):
            raise RuntimeError("internal error: command plan fails its specification")
        for j in comp:
            local_plans[j] = _plan_for_subgraph(layer.subgraphs[j], cost, command=j)
        component_rhos.append(cmd_plan.rho)
        component_stitched.append(
            stitch(cmd_plan.rho, {j: local_plans[j].schedule for j in comp}, horizon)
        )
    t_plans = time.perf_counter()

    stitched = merge_schedules(component_stitched)
    rho = merge_schedules(component_rhos)
    t_stitch = time.perf_counter()

    audit = audit_feasibility(net, stitched)
    if not audit.ok:
        raise RuntimeError(
            f"internal error: stitched schedule fails feasibility: {audit.violations[:3]}")

    report = {
        "epsilon_witness": eps,
        "components": len(component_rhos),
        "command_reports": rho_reports,
        "local_pba_states": {j: lp.report.get("pba_states") for j, lp in local_plans.items()},
        "stage_wallclock_ms": {
            "coverage": (t_cover - t0) * 1e3,
            "planning": (t_plans - t_cover) * 1e3,
            "stitch": (t_stitch - t_plans) * 1e3,
            "audit": (time.perf_counter() - t_stitch) * 1e3,
        },
    }
    return HierarchicalPlan(rho, local_plans, stitched, layer, report)


# ---------------------------------------------------------------------------
# feasibility audit

@dataclass
class AuditReport:
    ok: bool
    violations: list[dict]
    semantic_ok: bool
    steps_checked: int

    def first_violation(self) -> dict | None:
        return self.violations[0] if self.violations else None


def audit_feasibility(net: SensorNetwork, schedule: Schedule) -> AuditReport:
    """Check a schedule against the network requirements.

    Reports, with timestep and edges: (a) interference — a step activating
    two links that share an endpoint, or an unknown link; (b) starvation —
    an edge missing from the suffix.  Also evaluates the full specification
    formula on the lasso as an end-to-end cross-check.
    """
    violations: list[dict] = []
    steps = [*schedule.prefix, *schedule.suffix]
    for t, step in enumerate(steps):
        for e in sorted(step):
            if e not in net.edges:
                violations.append({"kind": "unknown_edge", "t": t, "edges": [list(e)]})
                continue
            clash = sorted((net.link_neighborhood(e) & step) - {e})
            if clash:
                violations.append(
                    {"kind": "interference", "t": t,
                     "edges": [list(e), *map(list, clash)]})
    missing = sorted(net.edges - schedule.suffix_items())
    for e in missing:
        violations.append({"kind": "liveness", "edge": list(e)})

    semantic_ok = eval_lasso(
        build_phi(net), link_word(schedule.prefix), link_word(schedule.suffix)
    )
    return AuditReport(
        ok=not violations and semantic_ok,
        violations=violations,
        semantic_ok=semantic_ok,
        steps_checked=len(steps),
    )


# ---------------------------------------------------------------------------
# serialization

def hlnc_plan_to_json(plan: HierarchicalPlan, cost: CostFn | None = None) -> dict:
    from .ts import plan_cost

    cost = cost or JaccardCost()
    return {
        "rho": {
            "prefix": [sorted(step) for step in plan.rho.prefix],
            "suffix": [sorted(step) for step in plan.rho.suffix],
        },
        "commands": [
            {
                "command": j,
                "vertices": list(lp.subgraph.nodes),
                "edges": [list(e) for e in lp.subgraph.sorted_edges()],
                "schedule": schedule_to_json(lp.schedule),
            }
            for j, lp in sorted(plan.local_plans.items())
        ],
        "stitched": schedule_to_json(plan.stitched, plan_cost(plan.stitched, cost)),
        "report": plan.report,
    }


def save_hlnc_plan(path, plan: HierarchicalPlan, cost: CostFn | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(hlnc_plan_to_json(plan, cost), fh, indent=2)
        fh.write("\n")
