"""Packing radii of a graph and the cone functions built on them.

``R_k`` is the largest ``r`` such that ``k`` distinct interior nodes are
pairwise at distance at least ``2r`` and each at distance at least ``r`` from
the boundary. Only finitely many distances matter, so the maximum is attained
on the candidate set ``{d(u, v)/2} U {d_B(u)}``; each candidate is tested by an
independent-set search in the conflict graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CenterOnBoundary, KTooLarge
from .graph import Graph, boundary_distance

SLACK = 1e-12


@dataclass(frozen=True)
class PackingResult:
    k: int
    radius: float
    centers: tuple[str, ...]
    no_boundary: bool = False
    candidates_tried: int = field(default=0, compare=False)

    def as_dict(self) -> dict:
        out = {
            "k": self.k,
            "radius": self.radius if math.isfinite(self.radius) else None,
            "centers": list(self.centers),
        }
        if self.no_boundary:
            out["no_boundary"] = True
        return out


def candidate_radii(g: Graph) -> np.ndarray:
    """Distinct candidate radii in decreasing order."""
    n = g.n_interior
    d = g.distances[:n, :n]
    iu = np.triu_indices(n, k=1)
    cands = list(d[iu] / 2.0)
    cands.extend(x for x in boundary_distance(g) if math.isfinite(x))
    cands = np.unique(np.array(cands, dtype=float))
    cands = cands[np.isfinite(cands) & (cands > 0)]
    return cands[::-1]


def _order(g: Graph) -> list[int]:
    # interior indices sorted by id so the first set found is lexicographically smallest
    return sorted(range(g.n_interior), key=lambda i: g.ids[i])


def find_centers(g: Graph, k: int, r: float) -> tuple[str, ...] | None:
    """Lexicographically smallest feasible center tuple at radius ``r``.

    Branch and bound over nodes sorted by id: a node is admissible if it is at
    least ``r`` from the boundary, and two nodes conflict if they are closer
    than ``2r``. Returns ``None`` when no independent set of size ``k`` exists.
    """
    n = g.n_interior
    d = g.distances[:n, :n]
    d_b = boundary_distance(g)
    order = [i for i in _order(g) if d_b[i] >= r - SLACK]
    if len(order) < k:
        return None
    ok = d >= 2.0 * r - SLACK

    chosen: list[int] = []

    def extend(pos: int) -> bool:
        if len(chosen) == k:
            return True
        for j in range(pos, len(order)):
            # bound: not enough nodes left to complete the set
            if len(order) - j < k - len(chosen):
                return False
            c = order[j]
            if all(ok[c, x] for x in chosen):
                chosen.append(c)
                if extend(j + 1):
                    return True
                chosen.pop()
        return False

    if extend(0):
        return tuple(g.ids[i] for i in chosen)
    return None


def packing_radius(g: Graph, k: int) -> PackingResult:
    """Exact ``k``-th packing radius with deterministic witness centers."""
    if k < 1 or k > g.n_interior:
        raise KTooLarge(f"k={k} outside 1..{g.n_interior}")
    no_boundary = not math.isfinite(float(np.min(boundary_distance(g), initial=math.inf)))
    if k == 1 and no_boundary:
        return PackingResult(1, math.inf, (g.ids[_order(g)[0]],), no_boundary=True)

    cands = candidate_radii(g)
    # feasibility is monotone in r: binary search over the sorted candidates
    lo, hi = 0, len(cands) - 1
    best = None
    tried = 0
    while lo <= hi:
        mid = (lo + hi) // 2
        tried += 1
        centers = find_centers(g, k, cands[mid])
        if centers is not None:
            best = (float(cands[mid]), centers)
            hi = mid - 1
        else:
            lo = mid + 1
    if best is None:
        raise KTooLarge(f"no feasible packing of {k} balls")
    return PackingResult(k, best[0], best[1], no_boundary=no_boundary, candidates_tried=tried)


def next_candidate_above(g: Graph, r: float) -> float | None:
    """Smallest candidate radius strictly larger than ``r`` (maximality witness)."""
    larger = [c for c in candidate_radii(g) if c > r + SLACK]
    return min(larger) if larger else None


def cone_functions(g: Graph, centers, r: float) -> list[np.ndarray]:
    """``f_i(u) = max(r - d(u, c_i), 0)`` for every center ``c_i``."""
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    n = g.n_interior
    out = []
    for c in centers:
        if g.is_boundary(c):
            raise CenterOnBoundary(f"center {c!r} is a boundary node")
        d = g.distances[g.index[c], :n]
        out.append(np.maximum(r - d, 0.0))
    return out


def cone_combination(cones: list[np.ndarray], coeffs) -> np.ndarray:
    return np.sum([a * f for a, f in zip(coeffs, cones)], axis=0)
