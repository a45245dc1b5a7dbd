import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import floyd_warshall, graph_and_function, graphs
from inflap.errors import (
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
from inflap.fixtures import g1, g2, g3
from inflap.graph import (
    EdgeFunction,
    Graph,
    boundary_distance,
    divergence,
    edge_inner,
    gradient,
    graph_to_dict,
    interior_components,
    norm_p,
    shortest_distance,
    validate_graph,
)


def raw_g2(w12=2.0):
    return {
        "nodes": [{"id": "b1", "boundary": True}, {"id": "u1", "boundary": False},
                  {"id": "u2", "boundary": False}, {"id": "b2", "boundary": True}],
        "edges": [{"u": "b1", "v": "u1", "weight": 3.0}, {"u": "u1", "v": "u2", "weight": w12},
                  {"u": "u2", "v": "b2", "weight": 2.0}],
    }


class TestValidation:
    def test_g2_description(self):
        g = validate_graph(raw_g2())
        assert g.interior == ("u1", "u2")
        assert set(g.boundary) == {"b1", "b2"}
        assert g.weight("u1", "u2") == g.weight("u2", "u1") == 2.0

    def test_single_node_without_edges(self):
        g = validate_graph({"nodes": [{"id": "a"}], "edges": []})
        assert g.n_interior == 1 and g.n_edges == 0

    @pytest.mark.parametrize("w", [0.0, -1.0, math.inf, math.nan])
    def test_nonpositive_weight(self, w):
        with pytest.raises(NonpositiveWeight):
            validate_graph(raw_g2(w))

    def test_duplicate_id(self):
        with pytest.raises(DuplicateNodeId):
            Graph(["a", "a"], [], [("a", "a", 1.0)])

    def test_dangling(self):
        with pytest.raises(DanglingEdgeEndpoint):
            Graph(["a"], [], [("a", "x", 1.0)])

    def test_self_loop_and_duplicate_edge(self):
        with pytest.raises(SelfLoop):
            Graph(["a"], [], [("a", "a", 1.0)])
        with pytest.raises(DuplicateEdge):
            Graph(["a", "b"], [], [("a", "b", 1.0), ("b", "a", 2.0)])

    def test_disconnected_interior(self):
        # connected only through the boundary
        with pytest.raises(DisconnectedInterior):
            Graph(["a", "b"], ["z"], [("a", "z", 1.0), ("z", "b", 1.0)])

    def test_all_violations_collected(self):
        with pytest.raises(InvalidGraph) as info:
            Graph(["a", "a"], [], [("a", "q", 0.0)])
        kinds = {type(v) for v in info.value.violations}
        assert {DuplicateNodeId, DanglingEdgeEndpoint, NonpositiveWeight} <= kinds

    @pytest.mark.parametrize("raw", [{}, {"nodes": [{"name": "a"}]}, {"nodes": [{"id": 3}]},
                                     {"nodes": [{"id": "a"}], "edges": [{"u": "a"}]}])
    def test_parse_errors(self, raw):
        with pytest.raises(ParseError):
            validate_graph(raw)

    def test_round_trip(self):
        for g in (g1(), g2(), g3()):
            assert validate_graph(graph_to_dict(g)) == g


class TestOperators:
    def test_gradient_g3(self):
        grad = gradient(g3(), {"u2": 5 / 6, "u3": 1 / 2})
        assert grad[("u2", "u3")] == pytest.approx(-1.0, abs=1e-15)
        assert grad[("u3", "u2")] == -grad[("u2", "u3")]

    def test_gradient_g2_boundary_distance(self):
        grad = gradient(g2(), [1 / 3, 1 / 2])
        assert grad[("u1", "b1")] == pytest.approx(-1.0, abs=1e-15)
        assert grad[("u1", "u2")] == pytest.approx(1 / 3, abs=1e-15)

    def test_constant_without_boundary(self):
        g = Graph(["a", "b", "c"], [], [("a", "b", 2.0), ("b", "c", 0.5)])
        assert not np.any(gradient(g, [4.0, 4.0, 4.0]).values)

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatch):
            gradient(g3(), {"u2": 1.0})
        with pytest.raises(DomainMismatch):
            gradient(g3(), [1.0, 2.0, 3.0])

    def test_divergence_hand_values(self):
        g = g3()
        Xi = EdgeFunction.from_mapping(g, {("u2", "u3"): -1 / 5, ("u3", "b2"): -3 / 10}, antisymmetric=True)
        np.testing.assert_allclose(-divergence(g, Xi), [3 / 5, 0.0], atol=1e-15)

    def test_divergence_of_zero(self):
        g = g1()
        assert not np.any(divergence(g, EdgeFunction(g, np.zeros(2 * g.n_edges))))

    def test_divergence_non_antisymmetric_uses_half(self):
        g = g3()
        G = EdgeFunction.from_mapping(g, {("u2", "u3"): 1.0})
        # 1/2 * 3 * (1 - 0) at u2, 1/2 * 3 * (0 - 1) at u3
        np.testing.assert_allclose(divergence(g, G), [1.5, -1.5])

    def test_antisymmetry_flag_enforced(self):
        g = g3()
        with pytest.raises(DomainMismatch):
            EdgeFunction(g, np.ones(2 * g.n_edges), antisymmetric=True)

    def test_norms(self):
        g = g3()
        f1 = np.array([5 / 6, 1 / 2])
        assert norm_p(f1, math.inf) == 5 / 6
        assert norm_p(gradient(g, f1), math.inf) == pytest.approx(1.0, abs=1e-15)
        assert norm_p(np.zeros(3), 3) == 0
        with pytest.raises(InvalidExponent):
            norm_p(f1, 0.5)

    def test_edge_norm_half_factor(self):
        g = g3()
        grad = gradient(g, [5 / 6, 1 / 2])
        direct = math.sqrt(0.5 * sum(x * x for x in grad.values))
        assert norm_p(grad, 2) == pytest.approx(direct, rel=1e-15)

    @given(graph_and_function())
    @settings(max_examples=60, deadline=None)
    def test_norm_converges_monotonically(self, gf):
        g, f = gf
        x = gradient(g, f)
        target = norm_p(x, math.inf)
        gaps = [abs(norm_p(x, p) - target) for p in (2, 4, 8, 16, 32, 64, 128, 256)]
        # the 1/2 edge factor lets small p undershoot, so compare magnitudes from p=4 on
        assert all(b <= a + 1e-12 * max(1, target) for a, b in zip(gaps[1:], gaps[2:]))
        assert gaps[-1] <= 0.01 * max(target, 1e-300) + 1e-15

    @given(graph_and_function())
    @settings(max_examples=100, deadline=None)
    def test_gradient_antisymmetric(self, gf):
        g, f = gf
        v = gradient(g, f).values
        m = g.n_edges
        assert np.array_equal(v[:m], -v[m:])

    @given(graph_and_function(), st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_integration_by_parts(self, gf, seed):
        g, f = gf
        G = EdgeFunction(g, np.random.default_rng(seed).normal(size=2 * g.n_edges))
        lhs = edge_inner(G, gradient(g, f))
        rhs = float(np.dot(-divergence(g, G), f))
        scale = max(1.0, float(np.sum(np.abs(G.values))) * float(np.max(np.abs(f), initial=1.0)) * 4)
        assert abs(lhs - rhs) <= 1e-12 * scale


class TestDistances:
    def test_g3_hand_values(self):
        g = g3()
        assert shortest_distance(g, "u2", "b2") == pytest.approx(5 / 6, abs=1e-15)
        assert shortest_distance(g, "u2", "u2") == 0

    def test_g1_values(self):
        g = g1()
        assert shortest_distance(g, "u1", "u5") == pytest.approx(2.0, abs=1e-15)
        np.testing.assert_allclose(boundary_distance(g), [1, 1, 0.5, 1, 1], atol=1e-15)

    def test_g2_boundary_distance(self):
        np.testing.assert_allclose(boundary_distance(g2()), [1 / 3, 1 / 2], atol=1e-15)
        assert boundary_distance(g2(), "u2") == pytest.approx(0.5)

    def test_empty_boundary(self):
        g = Graph(["a", "b"], [], [("a", "b", 1.0)])
        assert np.all(np.isinf(boundary_distance(g)))

    def test_unreachable(self):
        g = Graph(["a"], ["z"], [])
        with pytest.raises(Unreachable):
            shortest_distance(g, "a", "z")

    def test_distances_read_only(self):
        with pytest.raises(ValueError):
            g1().distances[0, 1] = 5.0

    @given(graphs())
    @settings(max_examples=80, deadline=None)
    def test_matches_floyd_warshall(self, g):
        np.testing.assert_allclose(g.distances, floyd_warshall(g), rtol=1e-13)

    def test_metric_axioms_on_fixtures(self):
        for g in (g1(), g2(), g3()):
            d = g.distances
            n = g.n_nodes
            assert np.array_equal(d, d.T)
            assert np.all(np.diag(d) == 0)
            assert np.all(d[~np.eye(n, dtype=bool)] > 0)
            for i, j, k in itertools.product(range(n), repeat=3):
                assert d[i, k] <= d[i, j] + d[j, k] + 1e-15

    @given(graph_and_function())
    @settings(max_examples=80, deadline=None)
    def test_lipschitz(self, gf):
        g, f = gf
        full = g.extend(f)
        L = norm_p(gradient(g, f), math.inf)
        d = g.distances
        gap = np.abs(full[:, None] - full[None, :])
        assert np.all(gap <= L * d + 1e-12)

    def test_components(self):
        g = Graph(["a", "b", "c"], ["z"], [("a", "b", 1.0), ("c", "z", 1.0)], require_connected=False)
        assert sorted(map(sorted, interior_components(g))) == [["a", "b"], ["c"]]
