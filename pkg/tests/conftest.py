"""Shared generators and independent oracles for the test-suite."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from inflap.graph import Graph

WEIGHTS = [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(2), Fraction(3), Fraction(5, 2), Fraction(4)]


def random_graph(rng, n_int=None, max_edges=20, n_bnd=None, max_int=10) -> Graph:
    """Random connected interior (spanning tree plus chords) with boundary leaves.

    Weights are drawn from a small set of rationals.
    """
    n = int(rng.integers(1, max_int + 1)) if n_int is None else n_int
    b = int(rng.integers(1, 4)) if n_bnd is None else n_bnd
    interior = [f"u{i}" for i in range(n)]
    boundary = [f"b{i}" for i in range(b)]
    pairs = set()
    for i in range(1, n):
        pairs.add((int(rng.integers(0, i)), i))
    edges = [(interior[a], interior[c]) for a, c in sorted(pairs)]
    for j in range(b):
        edges.append((boundary[j], interior[int(rng.integers(0, n))]))
    tries = 0
    while len(edges) < max_edges and tries < 30:
        tries += 1
        a, c = sorted(int(x) for x in rng.integers(0, n, size=2))
        if a != c and (a, c) not in pairs:
            pairs.add((a, c))
            edges.append((interior[a], interior[c]))
            if rng.random() < 0.4:
                break
    return Graph(
        interior,
        boundary,
        [(u, v, float(WEIGHTS[int(rng.integers(0, len(WEIGHTS)))])) for u, v in edges],
    )


@st.composite
def graphs(draw, max_int=7, max_edges=14):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_graph(np.random.default_rng(seed), max_edges=max_edges, max_int=max_int)


@st.composite
def graph_and_function(draw, max_int=7, allow_zero=True):
    g = draw(graphs(max_int=max_int))
    vals = st.floats(-2, 2, allow_nan=False, allow_infinity=False)
    if allow_zero:
        vals = st.one_of(st.just(0.0), vals)
    f = np.array(draw(st.lists(vals, min_size=g.n_interior, max_size=g.n_interior)))
    return g, f


def floyd_warshall(g: Graph) -> np.ndarray:
    """All-pairs distances, written independently of the library's Dijkstra."""
    n = g.n_nodes
    d = np.full((n, n), math.inf)
    np.fill_diagonal(d, 0.0)
    for u, v, w in g.edges:
        i, j = g.index[u], g.index[v]
        d[i, j] = d[j, i] = min(d[i, j], 1.0 / w)
    for k in range(n):
        d = np.minimum(d, d[:, [k]] + d[[k], :])
    return d


def brute_packing(g: Graph, k: int):
    """Exhaustive packing radius: every k-subset against every candidate radius."""
    d = floyd_warshall(g)
    n = g.n_interior
    d_b = d[:n, n:].min(axis=1) if g.boundary else np.full(n, math.inf)
    cands = {d[i, j] / 2 for i in range(n) for j in range(n) if i != j}
    cands |= {x for x in d_b if math.isfinite(x)}
    cands = sorted((c for c in cands if c > 0 and math.isfinite(c)), reverse=True)
    ids = sorted(g.interior)
    for r in cands:
        for combo in itertools.combinations(ids, k):
            idx = [g.index[u] for u in combo]
            if all(d_b[i] >= r - 1e-12 for i in idx) and all(
                d[a, c] >= 2 * r - 1e-12 for a, c in itertools.combinations(idx, 2)
            ):
                return r, combo
    return None, None


# acceptance summary -----------------------------------------------------------

ACCEPTANCE: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def criterion():
    """Record and print one pass/fail line, then assert."""

    def record(number: int, title: str, ok: bool, detail: str = ""):
        ACCEPTANCE.append((number, title, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
