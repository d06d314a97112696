"""Quantum network topologies, control-plane derivation, matching number.

The quantum graph holds the set of node pairs that can generate
entanglement. The classical control plane either mirrors it (decentralized
mode) or is a star around an added scheduler node (centralized mode).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

SCHEDULER_NODE = "S"

Edge = tuple[str, str]


def _edge(a: str, b: str) -> Edge:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class Topology:
    label: str
    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]

    def __post_init__(self):
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise ValueError(f"{self.label}: duplicate node ids")
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"{self.label}: self-loop on {a}")
            if a not in node_set or b not in node_set:
                raise ValueError(f"{self.label}: edge endpoint not in node set: ({a},{b})")
            if (a, b) in seen or _edge(a, b) != (a, b):
                raise ValueError(f"{self.label}: duplicate or unsorted edge ({a},{b})")
            seen.add((a, b))
        if not _connected(self.nodes, self.edges):
            raise ValueError(f"{self.label}: graph is not connected")

    def has_edge(self, a: str, b: str) -> bool:
        return _edge(a, b) in set(self.edges)

    def neighbors(self, node: str) -> list[str]:
        out = []
        for a, b in self.edges:
            if a == node:
                out.append(b)
            elif b == node:
                out.append(a)
        return out


@dataclass(frozen=True)
class ControlPlane:
    mode: str  # "esp" | "dqp"
    edges: tuple[Edge, ...]
    scheduler: Optional[str] = None


def _connected(nodes, edges) -> bool:
    if not nodes:
        return False
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {nodes[0]}
    stack = [nodes[0]]
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return len(seen) == len(nodes)


def build_grid(rows: int, cols: int) -> Topology:
    """Manhattan grid with 4-neighbor adjacency."""
    if rows < 1 or cols < 1 or rows * cols < 2:
        raise ValueError(f"grid:{rows}x{cols} is degenerate")
    nodes = tuple(f"r{r}c{c}" for r in range(rows) for c in range(cols))
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append(_edge(f"r{r}c{c}", f"r{r}c{c + 1}"))
            if r + 1 < rows:
                edges.append(_edge(f"r{r}c{c}", f"r{r + 1}c{c}"))
    return Topology(f"grid:{rows}x{cols}", nodes, tuple(sorted(edges)))


def build_complete(n: int) -> Topology:
    if n < 2:
        raise ValueError(f"complete:{n} is degenerate")
    nodes = tuple(f"v{i}" for i in range(n))
    edges = tuple(sorted(_edge(nodes[i], nodes[j])
                         for i in range(n) for j in range(i + 1, n)))
    return Topology(f"complete:{n}", nodes, edges)


def build_bipartite(m: int, n: int) -> Topology:
    if m < 1 or n < 1 or m + n < 2:
        raise ValueError(f"bipartite:{m}x{n} is degenerate")
    left = tuple(f"a{i}" for i in range(m))
    right = tuple(f"b{i}" for i in range(n))
    edges = tuple(sorted(_edge(u, v) for u in left for v in right))
    return Topology(f"bipartite:{m}x{n}", left + right, edges)


def build_star(n: int) -> Topology:
    """K_{1,n}: a hub joined to n leaves."""
    if n < 1:
        raise ValueError(f"star:{n} is degenerate")
    leaves = tuple(f"leaf{i}" for i in range(n))
    edges = tuple(sorted(_edge("hub", leaf) for leaf in leaves))
    return Topology(f"star:{n}", ("hub",) + leaves, edges)


def build_friendship(n: int) -> Topology:
    """n triangles sharing one hub vertex: 2n+1 nodes, 3n edges."""
    if n < 1:
        raise ValueError(f"friendship:{n} is degenerate")
    nodes = ["hub"]
    edges = []
    for i in range(n):
        a, b = f"t{i}a", f"t{i}b"
        nodes += [a, b]
        edges += [_edge("hub", a), _edge("hub", b), _edge(a, b)]
    return Topology(f"friendship:{n}", tuple(nodes), tuple(sorted(edges)))


def build_wheel(n: int) -> Topology:
    """W_n with n total vertices: hub joined to every vertex of C_{n-1}."""
    if n < 4:
        raise ValueError(f"wheel:{n} is degenerate (need >= 4 vertices)")
    rim = [f"rim{i}" for i in range(n - 1)]
    edges = []
    for i, v in enumerate(rim):
        edges.append(_edge("hub", v))
        edges.append(_edge(v, rim[(i + 1) % len(rim)]))
    return Topology(f"wheel:{n}", ("hub",) + tuple(rim), tuple(sorted(set(edges))))


def build_cycle(n: int) -> Topology:
    if n < 3:
        raise ValueError(f"cycle:{n} is degenerate")
    nodes = tuple(f"c{i}" for i in range(n))
    edges = tuple(sorted(_edge(nodes[i], nodes[(i + 1) % n]) for i in range(n)))
    return Topology(f"cycle:{n}", nodes, edges)


_BUILDERS = {
    "grid": (build_grid, 2),
    "complete": (build_complete, 1),
    "bipartite": (build_bipartite, 2),
    "star": (build_star, 1),
    "friendship": (build_friendship, 1),
    "wheel": (build_wheel, 1),
    "cycle": (build_cycle, 1),
}


def build_topology(spec: str) -> Topology:
    """Parse and build a topology from a CLI spec string, e.g. `grid:2x3`."""
    try:
        kind, _, params = spec.partition(":")
        builder, arity = _BUILDERS[kind]
        args = [int(p) for p in params.split("x")]
        if len(args) != arity:
            raise ValueError
    except (KeyError, ValueError):
        raise ValueError(f"unrecognized topology spec {spec!r}") from None
    return builder(*args)


#: The 14 graphs of the evaluation suite.
EVALUATION_SUITE = (
    "complete:2", "complete:3", "complete:4",
    "bipartite:2x3", "star:3", "star:4",
    "grid:2x2", "grid:2x3", "grid:3x3",
    "cycle:5", "cycle:6",
    "friendship:2", "friendship:3", "wheel:6",
)


def control_plane(topo: Topology, mode: str) -> ControlPlane:
    """Derive the classical control graph for a protocol mode."""
    if mode == "esp":
        return ControlPlane("esp", topo.edges)
    if mode == "dqp":
        edges = tuple(sorted(_edge(n, SCHEDULER_NODE) for n in topo.nodes))
        return ControlPlane("dqp", edges, scheduler=SCHEDULER_NODE)
    raise ValueError(f"unknown control-plane mode {mode!r}")


def matching_number(topo: Topology) -> int:
    """Size of a maximum matching, by branch-and-bound over the edge list.

    All evaluation graphs have at most 12 edges, so exact search is cheap.
    """

    def best(edges: tuple[Edge, ...], used: frozenset[str]) -> int:
        if not edges:
            return 0
        (a, b), rest = edges[0], edges[1:]
        skip = best(rest, used)
        if a in used or b in used:
            return skip
        take = 1 + best(rest, used | {a, b})
        return max(take, skip)

    return best(topo.edges, frozenset())
