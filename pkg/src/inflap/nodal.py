"""Nodal domains and the zero-splitting surgery.

Every edge joining nodes of opposite sign is cut by a new boundary node
``w = "z:<u>:<v>"`` placed where the linear interpolant of ``f`` vanishes:

    w_uw = w_uv (1 - f(v)/f(u)),    w_wv = w_uv (1 - f(u)/f(v)).

The two lengths add up to the original one, so distances and gradients are
unchanged, while the nodal domains become separate interior components.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotApplicable, ZeroFunction
from .graph import ATOL, RTOL, Graph, as_node_function, graph_to_dict, interior_components
from .inf_spectral import LimitEquationReport, check_limit_equation
from .packing import packing_radius


def _signs(f, atol):
    s = np.sign(f)
    s[np.abs(f) <= atol] = 0
    return s


def nodal_domains(g: Graph, f, atol: float = ATOL):
    """``(count, [(sign, nodes), ...])`` for the maximal connected sign-constant sets."""
    f = as_node_function(g, f)
    if not np.any(f):
        raise ZeroFunction("nodal domains of the zero function")
    s = _signs(f, atol)
    keep = [u for u, x in zip(g.interior, s) if x != 0]
    edges = [
        (a, b, w)
        for a, b, w in g.edges
        if not (g.is_boundary(a) or g.is_boundary(b))
        and s[g.index[a]] != 0 and s[g.index[a]] == s[g.index[b]]
    ]
    same = Graph(keep, [], edges, require_connected=False)
    doms = []
    for comp in interior_components(same):
        sign = int(s[g.index[comp[0]]])
        doms.append((sign, tuple(sorted(comp))))
    doms.sort(key=lambda d: d[1])
    return len(doms), doms


def split_id(u: str, v: str) -> str:
    return f"z:{u}:{v}"


@dataclass
class NodalDecomposition:
    domains: list[tuple[int, tuple[str, ...]]]
    split_graph: Graph
    edge_map: dict[tuple[str, str], list[tuple[str, str, float]]]
    f: np.ndarray  # restriction of f to the interior of split_graph

    def as_dict(self) -> dict:
        return {
            "domains": [{"sign": s, "nodes": list(n)} for s, n in self.domains],
            "graph": graph_to_dict(self.split_graph),
            "edge_map": [
                {"u": u, "v": v, "replacement": [{"u": a, "v": b, "weight": w} for a, b, w in rep]}
                for (u, v), rep in self.edge_map.items()
            ],
            "function": {"values": self.split_graph.to_mapping(self.f)},
        }


def split_at_zeros(g: Graph, f, atol: float = ATOL) -> NodalDecomposition:
    """Zeros become boundary nodes and sign-changing edges are cut at their zero."""
    f = as_node_function(g, f)
    _, domains = nodal_domains(g, f, atol)
    s = _signs(f, atol)
    full = g.extend(f)
    sfull = np.concatenate([s, np.zeros(g.n_nodes - g.n_interior)])

    interior = [u for u, x in zip(g.interior, s) if x != 0]
    boundary = [u for u, x in zip(g.interior, s) if x == 0] + list(g.boundary)
    edges, edge_map = [], {}
    for k, (u, v, w) in enumerate(g.edges):
        a, b = g.edge_u[k], g.edge_v[k]
        if sfull[a] * sfull[b] < 0:
            z = split_id(u, v)
            w_uz = w * (1.0 - full[b] / full[a])
            w_zv = w * (1.0 - full[a] / full[b])
            rep = [(u, z, w_uz), (z, v, w_zv)]
            boundary.append(z)
        else:
            rep = [(u, v, w)]
        edges.extend(rep)
        edge_map[(u, v)] = rep

    split = Graph(interior, boundary, edges, require_connected=False)
    fs = np.array([full[g.index[u]] for u in interior])
    return NodalDecomposition(domains, split, edge_map, fs)


def component_graphs(dec: NodalDecomposition) -> list[tuple[Graph, np.ndarray]]:
    """One ``(graph, f restricted)`` pair per nodal domain of the split graph."""
    out = []
    sg = dec.split_graph
    for _, nodes in dec.domains:
        sub = sg.subgraph(nodes)
        out.append((sub, np.array([dec.f[sg.index[u]] for u in sub.interior])))
    return out


def restriction_reports(g: Graph, f, Lambda: float, rtol: float = RTOL,
                        atol: float = ATOL) -> list[LimitEquationReport]:
    """Limit-equation reports of every nodal-domain restriction."""
    dec = split_at_zeros(g, f, atol)
    return [check_limit_equation(sub, fs, Lambda, rtol, atol) for sub, fs in component_graphs(dec)]


@dataclass
class NodalBoundsReport:
    n_domains: int
    radius: float
    lower: float
    Lambda: float
    holds: bool

    def as_dict(self):
        return {"n_domains": self.n_domains, "radius": self.radius, "lower_bound": self.lower,
                "Lambda": self.Lambda, "holds": self.holds}


def nodal_bounds_check(g: Graph, f, Lambda: float, rtol: float = RTOL,
                       atol: float = ATOL) -> NodalBoundsReport:
    """``1/R_N <= Lambda`` with ``N`` the number of nodal domains of ``f``."""
    if not check_limit_equation(g, f, Lambda, rtol, atol).overall:
        raise NotApplicable("the pair does not satisfy the limit equation")
    n, _ = nodal_domains(g, f, atol)
    r = packing_radius(g, n).radius
    lower = 1.0 / r
    return NodalBoundsReport(n, r, lower, Lambda, lower <= Lambda * (1 + rtol) + atol)
