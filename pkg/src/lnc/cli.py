"""Command-line front end.

Subcommands: ``gen`` (make or ingest networks), ``plan`` (centralized /
specialized / hierarchical synthesis), ``simulate`` (consensus rollout),
``check`` (audit a schedule), ``oracle`` (brute-force ground truth), and
``bench`` (scaling sweep).  Exit codes: 0 success, 2 configuration error,
3 infeasible or coverage failure, 4 budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import consensus as cons
from .errors import BudgetExceededError, CoverageError, InfeasibleError, StitchHorizonError
from .hlnc import audit_feasibility, hlnc_plan_to_json, plan_hlnc
from .network import (
    build_command_layer,
    build_geometric_graph,
    kmeans_place,
    load_network,
    positions_from_csv,
    positions_to_csv,
    random_geometric_network,
    save_network,
)
from .oracle import brute_force_optimal
from .planner import plan_centralized, plan_specialized_lnc
from .ts import (
    HausdorffCost,
    JaccardCost,
    Schedule,
    load_schedule,
    plan_cost,
    save_schedule,
    schedule_to_json,
    sequential_schedule,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_BUDGET = 4

DEFAULT_BUDGET = int(os.environ.get("LNC_STATE_BUDGET", 10**6))


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Resolved options for one subcommand run (flags > config file >
    defaults); echoed into every output for provenance."""

    command: str
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"command": self.command, **self.options}


def _resolve(args: argparse.Namespace, defaults: dict) -> RunConfig:
    merged = dict(defaults)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            file_conf = json.load(fh)
        unknown = set(file_conf) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_conf)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return RunConfig(args.subcommand, merged)


def _cost_fn(kind: str, net):
    if kind == "jaccard":
        return JaccardCost()
    if kind == "hausdorff":
        return HausdorffCost(net)
    raise ConfigError(f"unknown cost kind {kind!r}")


def _write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args) -> int:
    defaults = {
        "n": 20, "r": 2.5, "box": 10.0, "seed": 0,
        "csv": None, "out": "network.json", "to_csv": None,
        "K": None, "R": None, "kmeans_seed": 0,
    }
    conf = _resolve(args, defaults)
    o = conf.options
    if o["csv"]:
        positions = positions_from_csv(o["csv"])
        net = build_geometric_graph(positions, o["r"])
    else:
        net = random_geometric_network(o["n"], o["r"], o["box"], o["seed"])
    layer = None
    if o["K"] is not None:
        if o["R"] is None or o["R"] <= o["r"]:
            raise ConfigError("command layer needs R > r")
        centers = kmeans_place(net.positions, o["K"], o["kmeans_seed"])
        layer = build_command_layer(net, centers, o["R"])
    save_network(o["out"], net, layer)
    if o["to_csv"]:
        positions_to_csv(o["to_csv"], net.positions)
    print(json.dumps({
        "config": conf.to_dict(),
        "nodes": net.n,
        "edges": len(net.edges),
        "cmd_edges": len(layer.cmd_graph.edges) if layer else None,
        "out": o["out"],
    }))
    return EXIT_OK


def cmd_plan(args) -> int:
    defaults = {
        "net": None, "mode": "central", "policy": "structural",
        "cost": "jaccard", "out": "schedule.json", "report": None,
        "K": None, "R": None, "kmeans_seed": 0, "budget": DEFAULT_BUDGET,
        "nba_budget": 100_000, "fairness": False, "horizon": None,
        "retry_k": False,
    }
    conf = _resolve(args, defaults)
    o = conf.options
    if not o["net"]:
        raise ConfigError("plan needs --net")
    net, layer = load_network(o["net"])
    cost = _cost_fn(o["cost"], net)

    t0 = time.perf_counter()
    extra: dict = {}
    if o["mode"] == "central":
        schedule, report = plan_centralized(
            net, cost, mode=o["policy"], state_budget=o["budget"],
            nba_budget=o["nba_budget"], fairness=o["fairness"])
    elif o["mode"] == "specialized":
        schedule, report = plan_specialized_lnc(net, cost, state_budget=o["budget"])
    elif o["mode"] == "hlnc":
        if layer is None:
            if o["K"] is None or o["R"] is None:
                raise ConfigError("hlnc needs a command layer in the network file or --K and --R")
            if o["R"] <= net.r:
                raise ConfigError("hlnc needs R > r")
            k = o["K"]
            while True:
                centers = kmeans_place(net.positions, k, o["kmeans_seed"])
                layer = build_command_layer(net, centers, o["R"])
                if layer.epsilon_witness is not None or not o["retry_k"] or k >= net.n:
                    break
                k += 1
            extra["K_used"] = k
        plan = plan_hlnc(net, layer.centers, layer.R, cost, horizon=o["horizon"],
                         state_budget=o["budget"])
        schedule, report = plan.stitched, plan.report
        extra["hlnc"] = hlnc_plan_to_json(plan, cost)
    else:
        raise ConfigError(f"unknown plan mode {o['mode']!r}")

    audit = audit_feasibility(net, schedule)
    if not audit.ok:
        print(json.dumps({"error": "audit failed", "violations": audit.violations[:5]}),
              file=sys.stderr)
        return EXIT_INFEASIBLE
    save_schedule(o["out"], schedule, plan_cost(schedule, cost))
    full_report = {
        "config": conf.to_dict(),
        "cost": plan_cost(schedule, cost),
        "wallclock_ms": (time.perf_counter() - t0) * 1e3,
        "audit_ok": True,
        **({"planner": report} if isinstance(report, dict) else {}),
        **extra,
    }
    if o["report"]:
        _write_json(o["report"], full_report)
    print(json.dumps({k: v for k, v in full_report.items() if k != "hlnc"}, default=str))
    return EXIT_OK


def cmd_simulate(args) -> int:
    defaults = {
        "net": None, "schedule": None, "epsilon": 0.5, "steps": 1000,
        "seed": 0, "y0": "random", "basis_index": 0,
        "out_csv": "trajectory.csv", "out_summary": None,
        "compare_seq": False, "tol": 1e-6, "gap": 1e-3,
    }
    conf = _resolve(args, defaults)
    o = conf.options
    if not o["net"] or not o["schedule"]:
        raise ConfigError("simulate needs --net and --schedule")
    if not 0.0 < o["epsilon"] < 1.0:
        raise ConfigError("epsilon must lie strictly between 0 and 1")
    net, _ = load_network(o["net"])
    schedule = load_schedule(o["schedule"])
    if o["y0"] == "random":
        y0 = cons.random_state(net.n, o["seed"])
    elif o["y0"] == "basis":
        y0 = cons.basis_state(net.n, o["basis_index"])
    else:
        raise ConfigError(f"unknown y0 mode {o['y0']!r}")

    try:
        traj = cons.run(net, schedule, y0, o["epsilon"], o["steps"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    cons.write_trajectory_csv(o["out_csv"], traj)
    doc = {"config": conf.to_dict(),
           **cons.summary(traj, net, o["tol"], o["gap"])}
    if o["compare_seq"]:
        seq = sequential_schedule(net)
        seq_traj = cons.run(net, seq, y0, o["epsilon"], o["steps"])
        base, ext = os.path.splitext(o["out_csv"])
        cons.write_trajectory_csv(base + ".seq" + ext, seq_traj)
        doc["sequential"] = cons.summary(seq_traj, net, o["tol"], o["gap"])
    if o["out_summary"]:
        _write_json(o["out_summary"], doc)
    print(json.dumps(doc))
    return EXIT_OK


def cmd_check(args) -> int:
    defaults = {"net": None, "schedule": None, "window": None}
    conf = _resolve(args, defaults)
    o = conf.options
    if not o["net"] or not o["schedule"]:
        raise ConfigError("check needs --net and --schedule")
    net, _ = load_network(o["net"])
    schedule = load_schedule(o["schedule"])
    audit = audit_feasibility(net, schedule)
    doc = {
        "config": conf.to_dict(),
        "ok": audit.ok,
        "semantic_ok": audit.semantic_ok,
        "violations": audit.violations,
        "liveness": cons.liveness_check(net, schedule),
        "efficiency_pct": cons.efficiency(schedule, net),
    }
    if o["window"]:
        doc["jointly_connected"] = cons.check_joint_connectivity(net, schedule, o["window"])
    print(json.dumps(doc))
    return EXIT_OK if audit.ok else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    defaults = {"net": None, "cost": "jaccard", "max_prefix": 2,
                "max_suffix": 4, "out": None}
    conf = _resolve(args, defaults)
    o = conf.options
    if not o["net"]:
        raise ConfigError("oracle needs --net")
    net, _ = load_network(o["net"])
    cost = _cost_fn(o["cost"], net)
    try:
        schedule = brute_force_optimal(net, cost, o["max_prefix"], o["max_suffix"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if schedule is None:
        print(json.dumps({"config": conf.to_dict(), "found": False}))
        return EXIT_INFEASIBLE
    doc = {"config": conf.to_dict(), "found": True,
           **schedule_to_json(schedule, plan_cost(schedule, cost))}
    if o["out"]:
        _write_json(o["out"], doc)
    print(json.dumps(doc))
    return EXIT_OK


def _path_network(m_edges: int, r: float = 1.0):
    return build_geometric_graph([(float(i), 0.0) for i in range(m_edges + 1)], r)


def _cluster_chain_network(k: int, spacing: float = 6.0):
    """K well-separated three-sensor clusters in a row; consecutive command
    disks overlap, so one connected command graph controls everything."""
    positions = []
    for c in range(k):
        x = c * spacing
        positions += [(x, 0.0), (x + 1.0, 0.0), (x + 0.5, 0.8)]
    return build_geometric_graph(positions, 1.3)


def cmd_bench(args) -> int:
    defaults = {
        "out": "bench.csv", "sizes": "2,3,4,5,6,7,8",
        "faithful_sizes": "2,3,4,6,8,10,12,14",
        "k_values": "2,3,4,5,6,7,8", "budget": DEFAULT_BUDGET,
        "nba_budget": 50_000, "repeats": 1, "time_cap_s": 120.0,
    }
    conf = _resolve(args, defaults)
    o = conf.options
    rows = []

    def record(kind, size, fn):
        best = None
        status, pba, cost_val = "ok", None, None
        for _ in range(max(1, int(o["repeats"]))):
            t0 = time.perf_counter()
            try:
                _, report = fn()
                elapsed = time.perf_counter() - t0
                pba, cost_val = report["pba_states"], report["cost"]
            except BudgetExceededError:
                elapsed = time.perf_counter() - t0
                status = "DNF"
            best = elapsed if best is None else min(best, elapsed)
            if status == "DNF":
                break
        rows.append({"kind": kind, "size": size, "status": status,
                     "pba_states": pba, "cost": cost_val,
                     "wallclock_s": best})
        return status

    for m in [int(s) for s in str(o["sizes"]).split(",") if s]:
        net = _path_network(m)
        record("central-structural", m,
               lambda n=net: plan_centralized(n, mode="structural", state_budget=o["budget"]))

    for m in [int(s) for s in str(o["faithful_sizes"]).split(",") if s]:
        net = _path_network(m)
        status = record(
            "central-faithful", m,
            lambda n=net: plan_centralized(
                n, mode="faithful", state_budget=o["budget"], nba_budget=o["nba_budget"]))
        if status == "DNF":
            break  # larger instances only blow the budget sooner

    for k in [int(s) for s in str(o["k_values"]).split(",") if s]:
        net = _cluster_chain_network(k)
        centers = kmeans_place(net.positions, k, seed=0)

        def run_hlnc(n=net, c=centers):
            plan = plan_hlnc(n, c, R=3.0, state_budget=o["budget"])
            total = sum(plan.report["stage_wallclock_ms"].values())
            return plan.stitched, {"pba_states": sum(
                v or 0 for v in plan.report["local_pba_states"].values()),
                "cost": None, "wallclock_ms": total}

        record("hlnc", k, run_hlnc)

    with open(o["out"], "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["kind", "size", "status",
                                                "pba_states", "cost", "wallclock_s"])
        writer.writeheader()
        writer.writerows(rows)
    print(json.dumps({"config": conf.to_dict(), "rows": len(rows), "out": o["out"]}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def _add_common(sp):
    sp.add_argument("--config", help="JSON file with defaults for this subcommand")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lnc", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("gen", help="generate or ingest a sensor network")
    g.add_argument("--n", type=int)
    g.add_argument("--r", type=float)
    g.add_argument("--box", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--csv", help="read sensor positions from CSV (id,x,y)")
    g.add_argument("--to-csv", dest="to_csv", help="also write positions as CSV")
    g.add_argument("--K", type=int, help="place K command nodes by clustering")
    g.add_argument("--R", type=float, help="command radius")
    g.add_argument("--kmeans-seed", dest="kmeans_seed", type=int)
    g.add_argument("--out")
    _add_common(g)
    g.set_defaults(fn=cmd_gen)

    p = sub.add_parser("plan", help="synthesize a schedule")
    p.add_argument("--net")
    p.add_argument("--mode", choices=["central", "specialized", "hlnc"])
    p.add_argument("--policy", choices=["structural", "tableau", "faithful"],
                   help="centralized pipeline variant")
    p.add_argument("--cost", choices=["jaccard", "hausdorff"])
    p.add_argument("--K", type=int)
    p.add_argument("--R", type=float)
    p.add_argument("--kmeans-seed", dest="kmeans_seed", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--nba-budget", dest="nba_budget", type=int)
    p.add_argument("--fairness", action="store_const", const=True)
    p.add_argument("--horizon", type=int)
    p.add_argument("--retry-K", dest="retry_k", action="store_const", const=True,
                   help="escalate K until coverage holds")
    p.add_argument("--out")
    p.add_argument("--report")
    _add_common(p)
    p.set_defaults(fn=cmd_plan)

    s = sub.add_parser("simulate", help="consensus rollout under a schedule")
    s.add_argument("--net")
    s.add_argument("--schedule")
    s.add_argument("--epsilon", type=float)
    s.add_argument("--steps", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--y0", choices=["random", "basis"])
    s.add_argument("--basis-index", dest="basis_index", type=int)
    s.add_argument("--out-csv", dest="out_csv")
    s.add_argument("--out-summary", dest="out_summary")
    s.add_argument("--compare-seq", dest="compare_seq", action="store_const", const=True)
    s.add_argument("--tol", type=float)
    s.add_argument("--gap", type=float)
    _add_common(s)
    s.set_defaults(fn=cmd_simulate)

    c = sub.add_parser("check", help="audit a schedule against a network")
    c.add_argument("--net")
    c.add_argument("--schedule")
    c.add_argument("--window", type=int)
    _add_common(c)
    c.set_defaults(fn=cmd_check)

    o = sub.add_parser("oracle", help="brute-force ground-truth schedule")
    o.add_argument("--net")
    o.add_argument("--cost", choices=["jaccard", "hausdorff"])
    o.add_argument("--max-prefix", dest="max_prefix", type=int)
    o.add_argument("--max-suffix", dest="max_suffix", type=int)
    o.add_argument("--out")
    _add_common(o)
    o.set_defaults(fn=cmd_oracle)

    b = sub.add_parser("bench", help="scaling sweep: centralized vs hierarchical")
    b.add_argument("--out")
    b.add_argument("--sizes")
    b.add_argument("--faithful-sizes", dest="faithful_sizes")
    b.add_argument("--k-values", dest="k_values")
    b.add_argument("--budget", type=int)
    b.add_argument("--nba-budget", dest="nba_budget", type=int)
    b.add_argument("--repeats", type=int)
    _add_common(b)
    b.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG
    except (CoverageError,) as exc:
        print(json.dumps({"error": str(exc),
                          "hint": "raise K or R (or pass --retry-K)"}),
              file=sys.stderr)
        return EXIT_INFEASIBLE
    except (InfeasibleError, StitchHorizonError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_INFEASIBLE
    except BudgetExceededError as exc:
        print(json.dumps({"error": str(exc),
                          "hint": "raise --budget or LNC_STATE_BUDGET"}),
              file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_CONFIG


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
