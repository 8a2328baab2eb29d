"""Geometric sensor-network model, command-node placement, and graph utilities.

Sensors sit at fixed planar positions and can talk to every other sensor
within range ``r``; the resulting threshold graph is the substrate every
other module works on.  Command nodes form a second layer: each one controls
the sensors inside its radius ``R`` and talks to peer command nodes whose
coverage disks overlap (centre distance at most ``2R``).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Link = tuple[int, int]


def link(i: int, j: int) -> Link:
    """Canonical undirected link id (smaller endpoint first)."""
    if i == j:
        raise ValueError(f"self-loop link ({i},{j}) is not allowed")
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class Graph:
    """Undirected graph on integer nodes with canonical (i<j) edges."""

    nodes: tuple[int, ...]
    edges: frozenset[Link]

    def __post_init__(self):
        node_set = set(self.nodes)
        for i, j in self.edges:
            if i >= j:
                raise ValueError(f"edge ({i},{j}) is not canonical")
            if i not in node_set or j not in node_set:
                raise ValueError(f"edge ({i},{j}) references unknown node")

    @cached_property
    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {v: set() for v in self.nodes}
        for i, j in self.edges:
            adj[i].add(j)
            adj[j].add(i)
        return {v: frozenset(ns) for v, ns in adj.items()}

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adjacency[v]

    def has_edge(self, i: int, j: int) -> bool:
        return link(i, j) in self.edges

    def sorted_edges(self) -> list[Link]:
        return sorted(self.edges)

    def link_neighborhood(self, e: Link) -> frozenset[Link]:
        """All edges sharing an endpoint with ``e``, including ``e`` itself."""
        i, j = link(*e)
        if (i, j) not in self.edges:
            raise KeyError(f"edge ({i},{j}) not in graph")
        out = {(i, j)}
        for k in self.adjacency[i]:
            if k != j:
                out.add(link(i, k))
        for k in self.adjacency[j]:
            if k != i:
                out.add(link(j, k))
        return frozenset(out)

    def induced(self, vertices: Iterable[int]) -> "Graph":
        vs = tuple(sorted(set(vertices)))
        vset = set(vs)
        es = frozenset(e for e in self.edges if e[0] in vset and e[1] in vset)
        return Graph(vs, es)


def graph_from_edges(edges: Iterable[tuple[int, int]], nodes: Iterable[int] = ()) -> Graph:
    es = frozenset(link(i, j) for i, j in edges)
    vs = set(nodes)
    for i, j in es:
        vs.add(i)
        vs.add(j)
    return Graph(tuple(sorted(vs)), es)


@dataclass(frozen=True)
class SensorNetwork:
    """Sensor positions plus the derived proximity graph at radius ``r``."""

    positions: tuple[tuple[float, ...], ...]
    r: float
    graph: Graph = field(repr=False)
    bounds: tuple[tuple[float, ...], tuple[float, ...]]

    @property
    def n(self) -> int:
        return len(self.positions)

    @property
    def nodes(self) -> tuple[int, ...]:
        return self.graph.nodes

    @property
    def edges(self) -> frozenset[Link]:
        return self.graph.edges

    def neighbors(self, v: int) -> frozenset[int]:
        return self.graph.neighbors(v)

    def link_neighborhood(self, e: Link) -> frozenset[Link]:
        return self.graph.link_neighborhood(e)

    def sorted_edges(self) -> list[Link]:
        return self.graph.sorted_edges()

    @cached_property
    def coords(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float)

    def diameter_bound(self) -> float:
        lo, hi = self.bounds
        return float(math.dist(lo, hi))


def build_geometric_graph(positions: Sequence[Sequence[float]], r: float) -> SensorNetwork:
    """Threshold graph joining every pair at distance <= r (ties included)."""
    if r <= 0:
        raise ValueError("communication radius must be positive")
    pts = [tuple(float(c) for c in p) for p in positions]
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate sensor positions")
    if pts and len({len(p) for p in pts}) != 1:
        raise ValueError("positions must share one dimension")
    edges = set()
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if math.dist(pts[i], pts[j]) <= r:
                edges.add((i, j))
    g = Graph(tuple(range(len(pts))), frozenset(edges))
    if pts:
        dim = len(pts[0])
        lo = tuple(min(p[k] for p in pts) for k in range(dim))
        hi = tuple(max(p[k] for p in pts) for k in range(dim))
    else:
        lo, hi = (0.0, 0.0), (0.0, 0.0)
    return SensorNetwork(tuple(pts), float(r), g, (lo, hi))


def link_neighborhood(net: SensorNetwork | Graph, e: Link) -> frozenset[Link]:
    g = net.graph if isinstance(net, SensorNetwork) else net
    return g.link_neighborhood(e)


def connected_components(g: Graph | SensorNetwork) -> list[list[int]]:
    """Connected components, each sorted, ordered by smallest member."""
    graph = g.graph if isinstance(g, SensorNetwork) else g
    seen: set[int] = set()
    comps: list[list[int]] = []
    for start in graph.nodes:
        if start in seen:
            continue
        comp = []
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in graph.neighbors(v):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    comps.sort(key=lambda c: c[0])
    return comps


def k_hop_subgraph(g: Graph, j: int, k: int) -> Graph:
    """Induced subgraph on the closed k-hop neighborhood of node j."""
    if j not in g.adjacency:
        raise KeyError(f"node {j} not in graph")
    if k < 0:
        raise ValueError("k must be non-negative")
    frontier = {j}
    reach = {j}
    for _ in range(k):
        frontier = {w for v in frontier for w in g.neighbors(v)} - reach
        if not frontier:
            break
        reach |= frontier
    return g.induced(reach)


def k_hop_neighborhood(g: Graph, j: int, k: int) -> frozenset[int]:
    return frozenset(k_hop_subgraph(g, j, k).nodes)


def kmeans_place(
    positions: Sequence[Sequence[float]], k: int, seed: int = 0, max_iter: int = 200
) -> tuple[tuple[float, ...], ...]:
    """Lloyd's algorithm with greedy farthest-point seeding.

    Deterministic for a fixed seed.  Empty clusters keep their previous
    center.  Returns k centers as coordinate tuples.
    """
    pts = np.asarray(positions, dtype=float)
    n = len(pts)
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    centers = np.empty((k, pts.shape[1]))
    first = int(rng.integers(n))
    centers[0] = pts[first]
    d2 = np.sum((pts - centers[0]) ** 2, axis=1)
    for m in range(1, k):
        centers[m] = pts[int(np.argmax(d2))]
        d2 = np.minimum(d2, np.sum((pts - centers[m]) ** 2, axis=1))

    assign = np.full(n, -1)
    for _ in range(max_iter):
        dist2 = np.sum((pts[:, None, :] - centers[None, :, :]) ** 2, axis=2)
        new_assign = np.argmin(dist2, axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for m in range(k):
            members = pts[assign == m]
            if len(members):
                centers[m] = members.mean(axis=0)
    return tuple(tuple(float(c) for c in row) for row in centers)


def kmeans_objective(
    positions: Sequence[Sequence[float]],
    centers: Sequence[Sequence[float]],
    squared: bool = True,
) -> float:
    """Sum over points of the (squared) distance to the nearest center."""
    pts = np.asarray(positions, dtype=float)
    ctr = np.asarray(centers, dtype=float)
    d2 = np.sum((pts[:, None, :] - ctr[None, :, :]) ** 2, axis=2).min(axis=1)
    return float(d2.sum() if squared else np.sqrt(d2).sum())


def coverage_check(
    net: SensorNetwork, centers: Sequence[Sequence[float]], R: float
) -> float | None:
    """Coverage margin for a command-node placement.

    Let rho* be the worst sensor-to-nearest-center distance.  Returns the
    maximal margin eps = R - rho* when it exceeds r (so shrunken disks of
    radius R - eps still cover every sensor, which guarantees every link is
    contained in at least one command subgraph).  Returns None when no such
    margin exists.
    """
    if R <= net.r:
        raise ValueError("command radius R must exceed communication radius r")
    if not centers:
        return None
    pts = net.coords
    ctr = np.asarray(centers, dtype=float)
    d = np.sqrt(np.sum((pts[:, None, :] - ctr[None, :, :]) ** 2, axis=2))
    rho_star = float(d.min(axis=1).max()) if len(pts) else 0.0
    eps = R - rho_star
    return eps if eps > net.r else None


def local_subgraph(net: SensorNetwork, center: Sequence[float], R: float) -> Graph:
    """Induced sensor subgraph within distance R of a command center."""
    c = tuple(float(x) for x in center)
    inside = [i for i, p in enumerate(net.positions) if math.dist(p, c) <= R]
    return net.graph.induced(inside)


def build_command_graph(centers: Sequence[Sequence[float]], R: float) -> Graph:
    """Command-node graph joining centers whose R-disks overlap (<= 2R apart)."""
    cs = [tuple(float(x) for x in c) for c in centers]
    edges = set()
    for i in range(len(cs)):
        for j in range(i + 1, len(cs)):
            if math.dist(cs[i], cs[j]) <= 2 * R:
                edges.add((i, j))
    return Graph(tuple(range(len(cs))), frozenset(edges))


def uncovered_edges(
    net: SensorNetwork, centers: Sequence[Sequence[float]], R: float
) -> list[Link]:
    """Edges of the network contained in no command subgraph."""
    covered: set[Link] = set()
    for c in centers:
        covered |= local_subgraph(net, c, R).edges
    return sorted(net.edges - covered)


@dataclass(frozen=True)
class CommandLayer:
    """Command-node placement with its derived structure."""

    centers: tuple[tuple[float, ...], ...]
    R: float
    cmd_graph: Graph
    subgraphs: tuple[Graph, ...]
    epsilon_witness: float | None

    @property
    def k(self) -> int:
        return len(self.centers)


def build_command_layer(
    net: SensorNetwork, centers: Sequence[Sequence[float]], R: float
) -> CommandLayer:
    cs = tuple(tuple(float(x) for x in c) for c in centers)
    return CommandLayer(
        centers=cs,
        R=float(R),
        cmd_graph=build_command_graph(cs, R),
        subgraphs=tuple(local_subgraph(net, c, R) for c in cs),
        epsilon_witness=coverage_check(net, cs, R),
    )


# ---------------------------------------------------------------------------
# serialization

def network_to_json(net: SensorNetwork, layer: CommandLayer | None = None) -> dict:
    doc: dict = {
        "nodes": [
            {"id": i, **{ax: v for ax, v in zip("xyz", p)}}
            for i, p in enumerate(net.positions)
        ],
        "r": net.r,
    }
    if layer is not None:
        doc["centers"] = [
            {"id": j, **{ax: v for ax, v in zip("xyz", c)}}
            for j, c in enumerate(layer.centers)
        ]
        doc["R"] = layer.R
    return doc


def _coords_from_record(rec: dict) -> tuple[float, ...]:
    return tuple(float(rec[ax]) for ax in "xyz" if ax in rec)


def network_from_json(doc: dict) -> tuple[SensorNetwork, CommandLayer | None]:
    nodes = sorted(doc["nodes"], key=lambda rec: rec["id"])
    if [rec["id"] for rec in nodes] != list(range(len(nodes))):
        raise ValueError("node ids must be 0..N-1")
    net = build_geometric_graph([_coords_from_record(rec) for rec in nodes], doc["r"])
    layer = None
    if "centers" in doc:
        centers = sorted(doc["centers"], key=lambda rec: rec["id"])
        layer = build_command_layer(
            net, [_coords_from_record(rec) for rec in centers], doc["R"]
        )
    return net, layer


def load_network(path) -> tuple[SensorNetwork, CommandLayer | None]:
    with open(path) as fh:
        return network_from_json(json.load(fh))


def save_network(path, net: SensorNetwork, layer: CommandLayer | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_json(net, layer), fh, indent=2)
        fh.write("\n")


def positions_from_csv(path) -> list[tuple[float, ...]]:
    """Read sensor coordinates from a CSV file with an id,x,y header."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "id" not in reader.fieldnames:
            raise ValueError("expected header with id,x,y columns")
        rows = sorted(reader, key=lambda rec: int(rec["id"]))
    return [_coords_from_record(rec) for rec in rows]


def positions_to_csv(path, positions: Sequence[Sequence[float]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = len(positions[0]) if len(positions) else 2
        writer.writerow(["id", *list("xyz")[:dim]])
        for i, p in enumerate(positions):
            writer.writerow([i, *p])


def random_geometric_network(
    n: int, r: float, box: float = 10.0, seed: int = 0, dim: int = 2
) -> SensorNetwork:
    """Uniform random positions in [0, box]^dim joined at radius r."""
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, box, size=(n, dim))
    return build_geometric_graph([tuple(row) for row in pts], r)
