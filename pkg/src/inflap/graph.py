"""Weighted graphs with a Dirichlet boundary and their discrete calculus.

Node functions are plain ``numpy`` arrays indexed by the interior nodes of a
:class:`Graph` (in declaration order); boundary values are implicitly zero.
Edge functions live on directed arcs: arc ``k < m`` is the declared edge
``(u, v)`` and arc ``k + m`` is its reversal ``(v, u)``.
"""

from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import (
    DanglingEdgeEndpoint,
    DisconnectedInterior,
    DomainMismatch,
    DuplicateEdge,
    DuplicateNodeId,
    InvalidExponent,
    InvalidGraph,
    NonpositiveWeight,
    ParseError,
    SelfLoop,
    Unreachable,
)

RTOL = 1e-9
ATOL = 1e-12


class Graph:
    """Finite undirected weighted graph with a designated boundary.

    Weights are reciprocal edge lengths. Nodes are opaque string ids mapped
    to dense indices: interior nodes first, then boundary nodes.
    """

    def __init__(
        self,
        interior: Sequence[str],
        boundary: Sequence[str],
        edges: Iterable[tuple[str, str, float]],
        *,
        require_connected: bool = True,
    ):
        interior = [str(u) for u in interior]
        boundary = [str(u) for u in boundary]
        edges = [(str(u), str(v), w) for u, v, w in edges]
        violations = _check_parts(interior, boundary, edges, require_connected)
        if violations:
            first = violations[0]
            raise type(first)(
                "; ".join(str(v) for v in violations), violations=violations
            )

        self.interior = tuple(interior)
        self.boundary = tuple(boundary)
        self.ids = self.interior + self.boundary
        self.index = {u: i for i, u in enumerate(self.ids)}
        self.n_interior = len(self.interior)
        self.n_nodes = len(self.ids)
        self.edges = tuple((u, v, float(w)) for u, v, w in edges)
        self.n_edges = len(self.edges)

        eu = np.array([self.index[u] for u, _, _ in self.edges], dtype=int)
        ev = np.array([self.index[v] for _, v, _ in self.edges], dtype=int)
        w = np.array([w for _, _, w in self.edges], dtype=float)
        self.edge_u, self.edge_v, self.weights = eu, ev, w
        self.tails = np.concatenate([eu, ev])
        self.heads = np.concatenate([ev, eu])
        self.arc_weights = np.concatenate([w, w])
        self.arc_index = {
            (self.ids[t], self.ids[h]): k
            for k, (t, h) in enumerate(zip(self.tails, self.heads))
        }
        out_arcs: list[list[int]] = [[] for _ in range(self.n_nodes)]
        for k, t in enumerate(self.tails):
            out_arcs[t].append(k)
        self.out_arcs = tuple(np.array(a, dtype=int) for a in out_arcs)

        self._lock = threading.Lock()
        self._dist: np.ndarray | None = None

    def __repr__(self):
        return (
            f"Graph(interior={len(self.interior)}, boundary={len(self.boundary)}, "
            f"edges={self.n_edges})"
        )

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.interior == other.interior
            and self.boundary == other.boundary
            and self.edges == other.edges
        )

    __hash__ = object.__hash__

    def is_boundary(self, u: str) -> bool:
        return self.index[u] >= self.n_interior

    def weight(self, u: str, v: str) -> float:
        return float(self.arc_weights[self.arc_index[(u, v)]])

    def neighbors(self, u: str) -> list[str]:
        return [self.ids[self.heads[k]] for k in self.out_arcs[self.index[u]]]

    # distances -----------------------------------------------------------

    @property
    def distances(self) -> np.ndarray:
        """All-pairs shortest-path lengths (edge length ``1/w``), cached."""
        if self._dist is None:
            with self._lock:
                if self._dist is None:
                    n = self.n_nodes
                    lengths = csr_matrix(
                        (np.concatenate([1.0 / self.weights] * 2),
                         (self.tails, self.heads)),
                        shape=(n, n),
                    )
                    dist = shortest_path(lengths, method="D", directed=True)
                    dist.setflags(write=False)
                    self._dist = dist
        return self._dist

    # node functions --------------------------------------------------------

    def node_function(self, f) -> np.ndarray:
        """Coerce a mapping ``id -> value`` or an interior-length sequence."""
        return as_node_function(self, f)

    def to_mapping(self, f: np.ndarray) -> dict[str, float]:
        f = as_node_function(self, f)
        return {u: float(x) for u, x in zip(self.interior, f)}

    def extend(self, f: np.ndarray) -> np.ndarray:
        """Values on all nodes, zero on the boundary."""
        out = np.zeros(self.n_nodes)
        out[: self.n_interior] = f
        return out

    def subgraph(self, nodes: Iterable[str], *, require_connected=True) -> "Graph":
        """Graph induced by ``nodes`` plus the boundary nodes adjacent to them.

        Every listed node keeps its role (interior or boundary).
        """
        keep = set(nodes)
        for u in list(keep):
            if not self.is_boundary(u):
                keep.update(v for v in self.neighbors(u) if self.is_boundary(v))
        interior = [u for u in self.interior if u in keep]
        boundary = [u for u in self.boundary if u in keep]
        edges = [
            (u, v, w)
            for u, v, w in self.edges
            if u in keep and v in keep
            and not (self.is_boundary(u) and self.is_boundary(v))
        ]
        return Graph(interior, boundary, edges, require_connected=require_connected)


def _check_parts(interior, boundary, edges, require_connected):
    violations = []
    seen = set()
    for u in list(interior) + list(boundary):
        if u in seen:
            violations.append(DuplicateNodeId(f"duplicate node id {u!r}"))
        seen.add(u)

    pairs = set()
    for u, v, w in edges:
        if u not in seen or v not in seen:
            missing = [x for x in (u, v) if x not in seen]
            violations.append(
                DanglingEdgeEndpoint(f"edge ({u!r}, {v!r}) uses undeclared {missing}")
            )
        if u == v:
            violations.append(SelfLoop(f"self-loop at {u!r}"))
        key = frozenset((u, v))
        if key in pairs and u != v:
            violations.append(DuplicateEdge(f"edge ({u!r}, {v!r}) declared twice"))
        pairs.add(key)
        try:
            wf = float(w)
        except (TypeError, ValueError):
            wf = math.nan
        if isinstance(w, bool) or not math.isfinite(wf) or wf <= 0:
            violations.append(
                NonpositiveWeight(f"edge ({u!r}, {v!r}) has weight {w!r}; need 0 < w < inf")
            )

    if require_connected and interior and not violations:
        inner = set(interior)
        adj = {u: [] for u in interior}
        for u, v, _ in edges:
            if u in inner and v in inner:
                adj[u].append(v)
                adj[v].append(u)
        reached = {interior[0]}
        queue = deque([interior[0]])
        while queue:
            for v in adj[queue.popleft()]:
                if v not in reached:
                    reached.add(v)
                    queue.append(v)
        if len(reached) != len(inner):
            stray = sorted(inner - reached)
            violations.append(
                DisconnectedInterior(f"interior nodes {stray} not reachable from {interior[0]!r}")
            )
    return violations


def validate_graph(raw: Mapping) -> Graph:
    """Build a :class:`Graph` from the JSON description.

    ``{"nodes": [{"id": "u1", "boundary": false}, ...],
       "edges": [{"u": "u1", "v": "u2", "weight": 2.0}, ...]}``
    """
    try:
        nodes = raw["nodes"]
        edges = raw.get("edges", [])
        interior, boundary = [], []
        for node in nodes:
            ident = node["id"]
            if not isinstance(ident, str):
                raise ParseError(f"node id {ident!r} is not a string")
            (boundary if node.get("boundary", False) else interior).append(ident)
        parsed = [(e["u"], e["v"], e["weight"]) for e in edges]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"malformed graph description: {exc!r}") from exc
    return Graph(interior, boundary, parsed)


def graph_to_dict(g: Graph) -> dict:
    return {
        "nodes": [{"id": u, "boundary": g.is_boundary(u)} for u in g.ids],
        "edges": [{"u": u, "v": v, "weight": w} for u, v, w in g.edges],
    }


def as_node_function(g: Graph, f) -> np.ndarray:
    if isinstance(f, Mapping):
        keys = set(f)
        if keys != set(g.interior):
            extra = sorted(map(str, keys - set(g.interior)))
            missing = sorted(set(g.interior) - keys)
            raise DomainMismatch(
                f"node function domain differs from interior: extra={extra}, missing={missing}"
            )
        return np.array([float(f[u]) for u in g.interior])
    arr = np.asarray(f, dtype=float)
    if arr.shape != (g.n_interior,):
        raise DomainMismatch(
            f"expected {g.n_interior} interior values, got shape {arr.shape}"
        )
    return arr


@dataclass(frozen=True)
class EdgeFunction:
    """Values on both orientations of every edge of ``graph``."""

    graph: Graph
    values: np.ndarray
    antisymmetric: bool = False

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (2 * self.graph.n_edges,):
            raise DomainMismatch(
                f"edge function needs {2 * self.graph.n_edges} arc values, got {vals.shape}"
            )
        if self.antisymmetric:
            m = self.graph.n_edges
            if not np.array_equal(vals[:m], -vals[m:]):
                raise DomainMismatch("values flagged antisymmetric are not")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, arc: tuple[str, str]) -> float:
        return float(self.values[self.graph.arc_index[arc]])

    @classmethod
    def from_mapping(cls, g: Graph, values: Mapping, antisymmetric=False):
        """Build from ``{(u, v): value}``; missing arcs are zero.

        With ``antisymmetric`` set, a value given for ``(u, v)`` only also
        fills ``(v, u)`` with its negation.
        """
        vals = np.zeros(2 * g.n_edges)
        given = np.zeros(2 * g.n_edges, dtype=bool)
        m = g.n_edges
        for arc, x in values.items():
            try:
                k = g.arc_index[tuple(arc)]
            except KeyError:
                raise DomainMismatch(f"{arc!r} is not an edge") from None
            vals[k] = x
            given[k] = True
        if antisymmetric:
            rev = np.concatenate([np.arange(m, 2 * m), np.arange(m)])
            fill = ~given & given[rev]
            vals[fill] = -vals[rev][fill]
        return cls(g, vals, antisymmetric)


def gradient(g: Graph, f) -> EdgeFunction:
    """``grad f(u, v) = w_uv (f(v) - f(u))`` with ``f = 0`` on the boundary."""
    full = g.extend(as_node_function(g, f))
    vals = g.arc_weights * (full[g.heads] - full[g.tails])
    return EdgeFunction(g, vals, antisymmetric=True)


def divergence(g: Graph, G: EdgeFunction) -> np.ndarray:
    """``div G(u) = 1/2 sum_v w_uv (G(u, v) - G(v, u))`` on interior nodes.

    For antisymmetric ``G`` this is ``sum_v w_uv G(u, v)``.
    """
    vals = _arc_values(g, G)
    m = g.n_edges
    rev = np.concatenate([vals[m:], vals[:m]])
    contrib = 0.5 * g.arc_weights * (vals - rev)
    out = np.zeros(g.n_nodes)
    np.add.at(out, g.tails, contrib)
    return out[: g.n_interior]


def _arc_values(g: Graph, G) -> np.ndarray:
    if isinstance(G, EdgeFunction):
        if G.graph is not g and G.graph != g:
            raise DomainMismatch("edge function belongs to another graph")
        return G.values
    vals = np.asarray(G, dtype=float)
    if vals.shape != (2 * g.n_edges,):
        raise DomainMismatch(f"expected {2 * g.n_edges} arc values, got {vals.shape}")
    return vals


def norm_p(x, p: float) -> float:
    """Node or edge ``p``-norm; edge norms carry a factor 1/2 per orientation."""
    if not (p == math.inf or p >= 1):
        raise InvalidExponent(f"p must be >= 1 or inf, got {p}")
    is_edge = isinstance(x, EdgeFunction)
    vals = np.abs(x.values if is_edge else np.asarray(x, dtype=float))
    if vals.size == 0:
        return 0.0
    top = vals.max()
    if p == math.inf or top == 0.0:
        return float(top)
    # scale by the maximum so large p does not overflow
    total = np.sum((vals / top) ** p)
    if is_edge:
        total *= 0.5
    return float(top * total ** (1.0 / p))


def edge_inner(G: EdgeFunction, H: EdgeFunction) -> float:
    return float(0.5 * np.dot(G.values, H.values))


def shortest_distance(g: Graph, u: str, v: str) -> float:
    d = g.distances[g.index[u], g.index[v]]
    if not math.isfinite(d):
        raise Unreachable(f"no path between {u!r} and {v!r}")
    return float(d)


def boundary_distance(g: Graph, u: str | None = None):
    """Distance to the nearest boundary node.

    Returns a float for a single interior node ``u`` or an interior array when
    ``u`` is omitted; ``inf`` where no boundary node is reachable.
    """
    if g.boundary:
        d_b = g.distances[: g.n_interior, g.n_interior :].min(axis=1)
    else:
        d_b = np.full(g.n_interior, math.inf)
    if u is None:
        return d_b
    i = g.index[u]
    if i >= g.n_interior:
        raise DomainMismatch(f"{u!r} is a boundary node")
    return float(d_b[i])


def interior_components(g: Graph) -> list[list[str]]:
    """Connected components of the subgraph induced by the interior nodes."""
    n = g.n_interior
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in zip(g.edge_u, g.edge_v):
        if a < n and b < n:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[str]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(g.interior[i])
    return list(groups.values())


__all__ = [
    "ATOL",
    "RTOL",
    "EdgeFunction",
    "Graph",
    "InvalidGraph",
    "as_node_function",
    "boundary_distance",
    "divergence",
    "edge_inner",
    "gradient",
    "graph_to_dict",
    "interior_components",
    "norm_p",
    "shortest_distance",
    "validate_graph",
]
