"""Communication topologies, the edge removal schedule, and ring-preserving adaptation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import networkx as nx
import numpy as np

STATIC_KINDS = ("complete", "ring", "path", "grid", "random_tree", "small_world")

SMALL_WORLD_K = 4
SMALL_WORLD_P = 0.1

Edge = tuple[int, int]


def _edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


def ring_edges(n: int) -> frozenset[Edge]:
    return frozenset(_edge(i, (i + 1) % n) for i in range(n))


@dataclass(frozen=True)
class Topology:
    """Undirected simple graph over agents ``0..n-1``.

    Edges are stored as ordered pairs ``(u, v)`` with ``u < v``; the
    ``protected`` set is never touched by :func:`adapt`.
    """

    n: int
    edges: frozenset[Edge]
    protected: frozenset[Edge]
    kind: str
    seed: Optional[int] = None

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for a in adj:
            a.sort()
        return adj

    def to_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "kind": self.kind,
            "seed": self.seed,
            "edges": [list(e) for e in sorted(self.edges)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        n = int(data["n"])
        edges = frozenset(_edge(int(u), int(v)) for u, v in data["edges"])
        return cls(n, edges, _protected_for(n, edges), data["kind"], data.get("seed"))


def _protected_for(n: int, edges: frozenset[Edge]) -> frozenset[Edge]:
    ring = ring_edges(n)
    return ring if ring <= edges else edges


def _make(n: int, edges: Iterable[Edge], kind: str, seed: Optional[int]) -> Topology:
    es = frozenset(_edge(u, v) for u, v in edges)
    return Topology(n, es, _protected_for(n, es), kind, seed)


def _grid_edges(n: int) -> list[Edge]:
    rows = math.isqrt(n)
    cols = -(-n // rows)
    edges = []
    for k in range(n):
        r, c = divmod(k, cols)
        if c + 1 < cols and k + 1 < n:
            edges.append((k, k + 1))
        if k + cols < n:
            edges.append((k, k + cols))
    return edges


def _random_tree_edges(n: int, rng: np.random.Generator) -> list[Edge]:
    prufer = rng.integers(0, n, size=n - 2).tolist()
    return list(nx.from_prufer_sequence(prufer).edges())


def _is_connected(n: int, edges: Iterable[Edge]) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    seen[0] = True
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return all(seen)


def _small_world_edges(n: int, rng: np.random.Generator) -> list[Edge]:
    """Watts-Strogatz rewiring that refuses moves which would disconnect."""
    k = min(SMALL_WORLD_K, n - 1 - (n - 1) % 2)
    edges = {_edge(i, (i + j) % n) for j in range(1, k // 2 + 1) for i in range(n)}
    for j in range(1, k // 2 + 1):
        for i in range(n):
            e = _edge(i, (i + j) % n)
            if e not in edges or rng.random() >= SMALL_WORLD_P:
                continue
            choices = [w for w in range(n) if w != i and _edge(i, w) not in edges]
            if not choices:
                continue
            w = choices[int(rng.integers(len(choices)))]
            trial = (edges - {e}) | {_edge(i, w)}
            if _is_connected(n, trial):
                edges = trial
    return sorted(edges)


def build_static(kind: str, n: int, seed: int = 0) -> Topology:
    if n < 3:
        raise ValueError(f"topologies need at least 3 nodes, got {n}")
    rng = np.random.default_rng(seed)
    if kind == "complete":
        edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    elif kind == "ring":
        edges = list(ring_edges(n))
    elif kind == "path":
        edges = [(i, i + 1) for i in range(n - 1)]
    elif kind == "grid":
        edges = _grid_edges(n)
    elif kind == "random_tree":
        edges = _random_tree_edges(n, rng)
    elif kind == "small_world":
        edges = _small_world_edges(n, rng)
    else:
        raise ValueError(f"unknown topology kind {kind!r}")
    return _make(n, edges, kind, seed)


@dataclass(frozen=True)
class RemovalSchedule:
    steps: tuple[int, ...]
    alpha: float
    n: int

    @property
    def initial_edges(self) -> int:
        return self.steps[0]

    def __len__(self) -> int:
        return len(self.steps)

    def to_csv(self) -> str:
        lines = ["step,edge_count"]
        lines += [f"{i},{d}" for i, d in enumerate(self.steps)]
        return "\n".join(lines) + "\n"


def removal_schedule(n: int, alpha: float) -> RemovalSchedule:
    """Target edge counts from the complete graph down to the ring.

    Step ``i`` (starting at 2) removes ``round(|E0| / log10(i) * alpha)``
    edges, at least one, never going below ``n``.
    """
    if n < 3:
        raise ValueError(f"schedule needs at least 3 nodes, got {n}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    e0 = n * (n - 1) // 2
    steps = [e0]
    current, i = e0, 2
    while current > n:
        removed = max(1, math.floor(e0 / math.log10(i) * alpha + 0.5))
        current = max(n, current - removed)
        steps.append(current)
        i += 1
    return RemovalSchedule(tuple(steps), alpha, n)


def adapt(t: Topology, target: int, rng: np.random.Generator) -> Topology:
    """Remove random unprotected edges until ``target`` edges remain."""
    removable = sorted(t.edges - t.protected)
    k = t.edge_count - target
    if target > t.edge_count:
        raise ValueError(f"target {target} exceeds current edge count {t.edge_count}")
    if target < t.n or k > len(removable):
        raise ValueError(f"target {target} would cut into the protected ring")
    if k == 0:
        return t
    drop = rng.choice(len(removable), size=k, replace=False)
    gone = {removable[j] for j in drop}
    return Topology(t.n, t.edges - gone, t.protected, t.kind, t.seed)


def validate(t: Topology) -> Optional[str]:
    """Return a description of the first violated invariant, or None."""
    for u, v in t.edges:
        if u == v:
            return f"irreflexive: self-loop at node {u}"
    for u, v in t.edges:
        if not (0 <= u < t.n and 0 <= v < t.n):
            return f"edge ({u}, {v}) references an unknown node"
        if u > v:
            return f"symmetric: edge ({u}, {v}) is not in canonical undirected form"
    if not t.protected <= t.edges:
        return "protected ring is not contained in the edge set"
    if not _is_connected(t.n, t.edges):
        return "disconnected: not every node is reachable from node 0"
    return None
