"""The infinity side: limit equation, generalized eigenpairs and their certificates.

A generalized eigenpair ``(f, L)`` is certified by a node function ``xi`` and
an antisymmetric edge function ``Xi`` with ``-div Xi = L xi``, unit 1-norms,
``xi`` carried by the maximum points of ``|f|`` and ``Xi`` carried by the
edges where ``|grad f|`` is maximal (with matching signs). Such a pair exists
exactly when a monotone path of maximal-gradient edges leaves a maximum point
and ends either on the boundary or at a node of opposite extreme value.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConstantFunction,
    MalformedCertificate,
    NotAnEigenpair,
    NotApplicable,
    UnverifiedCertificate,
    ZeroFunction,
)
from .graph import (
    ATOL,
    RTOL,
    EdgeFunction,
    Graph,
    as_node_function,
    boundary_distance,
    divergence,
    gradient,
    norm_p,
)
from .packing import packing_radius


def _local_gradients(g: Graph, f: np.ndarray):
    """Per interior node: (max |grad|, max descent, max ascent)."""
    grad = gradient(g, f).values
    n = g.n_interior
    norm = np.zeros(n)
    desc = np.zeros(n)
    asc = np.zeros(n)
    for u in range(n):
        arcs = g.out_arcs[u]
        if arcs.size == 0:
            continue
        vals = grad[arcs]
        norm[u] = np.max(np.abs(vals))
        desc[u] = max(0.0, float(np.max(-vals)))
        asc[u] = max(0.0, float(np.max(vals)))
    return norm, desc, asc


def inf_laplacian(g: Graph, f) -> np.ndarray:
    """``||(grad f)^-(u)||_inf - ||(grad f)^+(u)||_inf`` on interior nodes."""
    f = as_node_function(g, f)
    _, desc, asc = _local_gradients(g, f)
    return desc - asc


@dataclass
class NodeVerdict:
    node: str
    branch: str
    values: dict
    residual: float
    satisfied: bool

    def as_dict(self):
        return {
            "node": self.node,
            "branch": self.branch,
            "values": dict(self.values),
            "residual": self.residual,
            "satisfied": self.satisfied,
        }


@dataclass
class LimitEquationReport:
    nodes: list[NodeVerdict]
    overall: bool
    tol: float
    rtol: float
    atol: float
    Lambda: float

    def node(self, u: str) -> NodeVerdict:
        for v in self.nodes:
            if v.node == u:
                return v
        raise KeyError(u)

    @property
    def failing(self) -> list[str]:
        return [v.node for v in self.nodes if not v.satisfied]

    @property
    def max_residual(self) -> float:
        return max((v.residual for v in self.nodes), default=0.0)

    def as_dict(self):
        return {
            "Lambda": self.Lambda,
            "overall": self.overall,
            "tol": self.tol,
            "rtol": self.rtol,
            "atol": self.atol,
            "failing": self.failing,
            "nodes": [v.as_dict() for v in self.nodes],
        }


def _verdicts(g, f, Lambda, rtol, atol, subset=None):
    norm, desc, asc = _local_gradients(g, f)
    lap = desc - asc
    scale = max(norm_p(gradient(g, f), math.inf), Lambda * float(np.max(np.abs(f))))
    tol = rtol * scale + atol
    out = []
    for u in range(g.n_interior) if subset is None else subset:
        x = float(f[u])
        if abs(x) <= atol:
            branch = "zero"
            values = {"inf_laplacian": float(lap[u])}
            res = abs(lap[u])
        elif x > 0:
            branch = "positive"
            slack = norm[u] - Lambda * x
            values = {"grad_norm": float(norm[u]), "slack": float(slack), "inf_laplacian": float(lap[u])}
            res = abs(min(slack, lap[u]))
        else:
            branch = "negative"
            slack = -norm[u] - Lambda * x
            values = {"grad_norm": float(norm[u]), "slack": float(slack), "inf_laplacian": float(lap[u])}
            res = abs(max(slack, lap[u]))
        out.append(NodeVerdict(g.interior[u], branch, values, float(res), bool(res <= tol)))
    return out, tol


def check_limit_equation(g: Graph, f, Lambda: float, rtol: float = RTOL, atol: float = ATOL) -> LimitEquationReport:
    """Per-node test of the three-branch limit eigenvalue system.

    Where ``f > 0`` the smaller of ``||grad f(u)|| - L f(u)`` and
    ``Delta_inf f(u)`` must vanish, where ``f < 0`` the larger of
    ``-||grad f(u)|| - L f(u)`` and ``Delta_inf f(u)``, and where ``f = 0``
    (``|f| <= atol``) the infinity-Laplacian itself. The tolerance is
    ``rtol * max(||grad f||, L ||f||) + atol``.
    """
    f = as_node_function(g, f)
    if not np.any(f):
        raise ZeroFunction("limit equation of the zero function")
    if Lambda < 0:
        raise ValueError("Lambda must be nonnegative")
    nodes, tol = _verdicts(g, f, Lambda, rtol, atol)
    return LimitEquationReport(nodes, all(v.satisfied for v in nodes), tol, rtol, atol, Lambda)


@dataclass
class SubCase:
    """A value of ``f(u)`` that zeroes one term of the positive branch."""

    zeroed: str  # "inf_laplacian" or "slack"
    value: float
    slack: float
    inf_laplacian: float

    @property
    def solves(self) -> bool:
        return min(self.slack, self.inf_laplacian) >= -ATOL


def positive_branch_cases(g: Graph, f, Lambda: float, u: str) -> list[SubCase]:
    """Values ``x > 0`` of ``f(u)`` (others fixed) zeroing either positive-branch term.

    Both terms are piecewise linear in ``x``; candidates are the crossings of
    their linear pieces, each re-evaluated on the modified function.
    """
    f = as_node_function(g, f).copy()
    i = g.index[u]
    if i >= g.n_interior:
        raise ValueError(f"{u!r} is not interior")
    full = g.extend(f)
    nb = [(float(full[g.heads[k]]), float(g.arc_weights[k])) for k in g.out_arcs[i]]

    cands = []
    for a, (fa, wa) in enumerate(nb):
        # descent via a meets ascent via b:  wa (x - fa) = wb (fb - x)
        for b, (fb, wb) in enumerate(nb):
            if a != b:
                cands.append(("inf_laplacian", (wa * fa + wb * fb) / (wa + wb)))
        # |grad| via a equals L x:  wa |fa - x| = L x
        for s in (1.0, -1.0):
            den = Lambda + s * wa
            if den != 0:
                cands.append(("slack", s * wa * fa / den))

    out, seen = [], set()
    for kind, x in cands:
        if not x > ATOL:
            continue
        f[i] = x
        norm, desc, asc = _local_gradients(g, f)
        slack = norm[i] - Lambda * x
        lap = desc[i] - asc[i]
        target = lap if kind == "inf_laplacian" else slack
        key = (kind, round(x, 12))
        if abs(target) <= 1e-12 * max(1.0, abs(x)) and key not in seen:
            seen.add(key)
            out.append(SubCase(kind, x, float(slack), float(lap)))
    return sorted(out, key=lambda c: (c.zeroed, c.value))


def rayleigh_consistency(g: Graph, f, Lambda: float, rtol: float = RTOL, atol: float = ATOL) -> bool:
    """For a limit-equation solution, ``L`` equals ``||grad f|| / ||f||``."""
    f = as_node_function(g, f)
    if not np.any(f):
        raise ZeroFunction("zero function")
    gn = norm_p(gradient(g, f), math.inf)
    if gn == 0:
        raise ConstantFunction("constant function: the trivial pair with L = 0")
    if not check_limit_equation(g, f, Lambda, rtol, atol).overall:
        raise NotApplicable("the pair does not satisfy the limit equation")
    r = gn / norm_p(f, math.inf)
    return abs(Lambda - r) <= rtol * Lambda + atol


# certificates -------------------------------------------------------------


@dataclass
class SubgradientCertificate:
    xi: np.ndarray
    Xi: EdgeFunction
    path: tuple[str, ...] | None = None
    kind: str | None = None  # "boundary" or "opposite"

    def as_dict(self, g: Graph) -> dict:
        return {
            "xi": g.to_mapping(self.xi),
            "Xi": {f"{u}->{v}": float(self.Xi.values[k]) for (u, v), k in g.arc_index.items()},
            "path": list(self.path) if self.path else None,
            "kind": self.kind,
        }


@dataclass
class CertificateReport:
    violations: dict
    tol: float
    passed: bool

    def as_dict(self):
        return {"passed": self.passed, "tol": self.tol, "violations": dict(self.violations)}


def _maximal_sets(g, f, rtol, atol):
    grad = gradient(g, f).values
    M = float(np.max(np.abs(f)))
    G = float(np.max(np.abs(grad))) if grad.size else 0.0
    vmax = np.abs(f) >= M - (rtol * M + atol)
    emax = np.abs(grad) >= G - (rtol * G + atol)
    return grad, M, G, vmax, emax


def _guard(g, f):
    if not np.any(f):
        raise ZeroFunction("zero function")
    if norm_p(gradient(g, f), math.inf) == 0:
        raise ConstantFunction("constant function: the trivial pair with L = 0")


def find_generalized_certificate(
    g: Graph, f, Lambda: float, rtol: float = RTOL, atol: float = ATOL
) -> SubgradientCertificate:
    """Search for a monotone maximal-gradient path and build its certificate.

    Starts are the maximum points of ``|f|`` in id order; the walk follows
    maximal-gradient edges on which ``sign f(u1) * f`` strictly decreases and
    accepts on hitting the boundary with ``L * length = 1`` or a node with
    ``f = -f(u1)`` and ``L * length = 2``. Raises :class:`NotAnEigenpair`
    carrying the explored dead-end paths when no path qualifies.
    """
    f = as_node_function(g, f)
    _guard(g, f)
    grad, M, G, vmax, emax = _maximal_sets(g, f, rtol, atol)
    full = g.extend(f)
    n = g.n_interior
    frontier: list[list[str]] = []

    def accept(length, target):
        return abs(Lambda * length - target) <= rtol * target + atol * max(1.0, Lambda)

    starts = sorted(np.flatnonzero(vmax), key=lambda i: g.ids[i])
    for s0 in starts:
        sign = 1.0 if f[s0] > 0 else -1.0
        stack = [(int(s0), [int(s0)], [], 0.0)]
        while stack:
            u, nodes, arcs, length = stack.pop()
            extended = False
            # reversed so that the lowest-id neighbour is explored first
            for k in sorted(g.out_arcs[u], key=lambda k: g.ids[g.heads[k]], reverse=True):
                v = int(g.heads[k])
                if not emax[k] or sign * (full[v] - full[u]) >= 0:
                    continue
                extended = True
                L = length + 1.0 / g.arc_weights[k]
                if v >= n:
                    if accept(L, 1.0):
                        return _build(g, f, Lambda, nodes + [v], arcs + [k], L, "boundary", rtol, atol)
                    frontier.append([g.ids[i] for i in nodes + [v]])
                    continue
                if abs(full[v] + full[s0]) <= rtol * M + atol:
                    if accept(L, 2.0):
                        return _build(g, f, Lambda, nodes + [v], arcs + [k], L, "opposite", rtol, atol)
                stack.append((v, nodes + [v], arcs + [k], L))
            if not extended:
                frontier.append([g.ids[i] for i in nodes])
    raise NotAnEigenpair(f"no certifying path for Lambda={Lambda!r}", frontier)


def _build(g, f, Lambda, nodes, arcs, length, kind, rtol, atol):
    m = g.n_edges
    vals = np.zeros(2 * m)
    grad = gradient(g, f).values
    for k in arcs:
        x = np.sign(grad[k]) / (g.arc_weights[k] * length)
        rev = k + m if k < m else k - m
        vals[k] = x
        vals[rev] = -x
    xi = np.zeros(g.n_interior)
    first, last = nodes[0], nodes[-1]
    if kind == "boundary":
        xi[first] = np.sign(f[first])
    else:
        xi[first] = 0.5 * np.sign(f[first])
        xi[last] = 0.5 * np.sign(f[last])
    cert = SubgradientCertificate(xi, EdgeFunction(g, vals, antisymmetric=True),
                                  tuple(g.ids[i] for i in nodes), kind)
    report = verify_certificate(g, f, Lambda, cert, rtol, atol)
    if not report.passed:
        raise NotAnEigenpair(f"path certificate failed verification: {report.violations}",
                             [list(cert.path)])
    return cert


def verify_certificate(g: Graph, f, Lambda: float, cert: SubgradientCertificate,
                       rtol: float = RTOL, atol: float = ATOL) -> CertificateReport:
    """Check the seven conditions of the certificate system; report max violations."""
    f = as_node_function(g, f)
    xi = np.asarray(cert.xi, dtype=float)
    if xi.shape != (g.n_interior,):
        raise MalformedCertificate(f"xi has shape {xi.shape}")
    Xi = cert.Xi
    if not isinstance(Xi, EdgeFunction) or Xi.values.shape != (2 * g.n_edges,):
        raise MalformedCertificate("Xi must be an edge function on this graph")
    m = g.n_edges
    if not np.allclose(Xi.values[:m], -Xi.values[m:], rtol=0, atol=atol):
        raise MalformedCertificate("Xi is not antisymmetric")
    _guard(g, f)
    grad, M, G, vmax, emax = _maximal_sets(g, f, rtol, atol)
    X = Xi.values

    def worst(a):
        a = np.asarray(a, dtype=float)
        return float(np.max(a)) if a.size else 0.0

    v = {
        "divergence": worst(np.abs(-divergence(g, Xi) - Lambda * xi)),
        "xi_norm": abs(float(np.sum(np.abs(xi))) - 1.0),
        "Xi_norm": abs(0.5 * float(np.sum(np.abs(X))) - 1.0),
        "xi_support": worst(np.abs(xi[~vmax])),
        "xi_sign": worst(np.maximum(0.0, -xi * np.sign(f))),
        "Xi_support": worst(np.abs(X[~emax])),
        "Xi_sign": worst(np.maximum(0.0, -X[emax] * np.sign(grad[emax]))),
    }
    tol = rtol * max(1.0, Lambda) + atol
    return CertificateReport(v, tol, all(x <= tol for x in v.values()))


@dataclass
class AdmissibleDensities:
    mu: np.ndarray
    tau: np.ndarray  # one value per undirected edge, in declaration order
    factors: tuple[float, float] = (1.0, 1.0)
    residuals: dict = field(default_factory=dict)

    def edge_values(self, g: Graph) -> dict:
        return {f"{u}-{v}": float(t) for (u, v, _), t in zip(g.edges, self.tau)}

    def as_dict(self, g: Graph) -> dict:
        return {"mu": g.to_mapping(self.mu), "tau": self.edge_values(g),
                "residuals": dict(self.residuals)}


def densities_from_certificate(g: Graph, f, Lambda: float, cert: SubgradientCertificate,
                               rtol: float = RTOL, atol: float = ATOL) -> AdmissibleDensities:
    """Densities ``mu``, ``tau`` turning the certificate into a weighted linear problem.

    Shapes are ``|xi| / ||f||`` and the symmetrised ``|Xi| / ||grad f||``;
    the two scalar factors are then fixed by the unit-norm conditions and the
    weighted system is checked by substitution.
    """
    f = as_node_function(g, f)
    if not verify_certificate(g, f, Lambda, cert, rtol, atol).passed:
        raise UnverifiedCertificate("certificate does not verify")
    grad, M, G, _, _ = _maximal_sets(g, f, rtol, atol)
    m = g.n_edges
    X = cert.Xi.values
    mu0 = np.abs(cert.xi) / M
    tau0 = (np.abs(X[:m]) + np.abs(X[m:])) / (2.0 * G)
    a = 1.0 / float(np.sum(np.abs(mu0 * f)))
    b = 1.0 / float(np.sum(np.abs(tau0 * grad[:m])))
    dens = AdmissibleDensities(a * mu0, b * tau0, (a, b))
    dens.residuals = verify_densities(g, f, Lambda, dens, rtol, atol)
    if max(dens.residuals.values()) > rtol * max(1.0, Lambda) + atol:
        raise UnverifiedCertificate(f"densities fail substitution: {dens.residuals}")
    return dens


def verify_densities(g: Graph, f, Lambda: float, dens: AdmissibleDensities,
                     rtol: float = RTOL, atol: float = ATOL) -> dict:
    """Residuals of the weighted system by direct substitution."""
    f = as_node_function(g, f)
    grad, M, G, vmax, emax = _maximal_sets(g, f, rtol, atol)
    tau_arcs = np.concatenate([dens.tau, dens.tau])
    flux = EdgeFunction(g, tau_arcs * grad, antisymmetric=True)
    mu = np.asarray(dens.mu, dtype=float)
    return {
        "equation": float(np.max(np.abs(-divergence(g, flux) - Lambda * mu * f), initial=0.0)),
        "flux_norm": abs(0.5 * float(np.sum(np.abs(flux.values))) - 1.0),
        "node_norm": abs(float(np.sum(np.abs(mu * f))) - 1.0),
        "negativity": max(0.0, -float(np.min(mu, initial=0.0)), -float(np.min(dens.tau, initial=0.0))),
        "mu_support": float(np.max(np.abs(mu[~vmax]), initial=0.0)),
        "tau_support": float(np.max(np.abs(dens.tau[~emax[: g.n_edges]]), initial=0.0)),
    }


@dataclass
class SupportReport:
    support: list[str]
    nodes: list[NodeVerdict]
    passed: bool
    warning: str | None = None

    def as_dict(self):
        return {"support": self.support, "passed": self.passed, "warning": self.warning,
                "nodes": [v.as_dict() for v in self.nodes]}


def support_subgraph_check(g: Graph, f, Lambda: float, dens: AdmissibleDensities,
                           rtol: float = RTOL, atol: float = ATOL) -> SupportReport:
    """Limit equation restricted to interior nodes touching an edge with ``tau > 0``."""
    f = as_node_function(g, f)
    n = g.n_interior
    supp = set()
    for k, t in enumerate(dens.tau):
        if t > atol:
            for x in (g.edge_u[k], g.edge_v[k]):
                if x < n:
                    supp.add(int(x))
    idx = sorted(supp, key=lambda i: g.ids[i])
    if not idx:
        msg = "empty density support: check is vacuous"
        warnings.warn(msg)
        return SupportReport([], [], True, msg)
    nodes, _ = _verdicts(g, f, Lambda, rtol, atol, idx)
    return SupportReport([g.ids[i] for i in idx], nodes, all(v.satisfied for v in nodes))


# variational bounds -------------------------------------------------------


@dataclass(frozen=True)
class VariationalBound:
    k: int
    bound: float
    exact: bool
    radius: float
    centers: tuple[str, ...]

    def as_dict(self):
        return {"k": self.k, "bound": self.bound, "exact": self.exact,
                "radius": self.radius if math.isfinite(self.radius) else None,
                "centers": list(self.centers)}


def infinity_variational_bounds(g: Graph, kmax: int) -> list[VariationalBound]:
    """``1/R_k`` for ``k = 1..kmax``; equal to the variational eigenvalue for k <= 2."""
    out = []
    for k in range(1, kmax + 1):
        pr = packing_radius(g, k)
        out.append(VariationalBound(k, 1.0 / pr.radius, k <= 2, pr.radius, pr.centers))
    return out


def eigenvalue_from_geometry(g: Graph, f, u: str | None = None,
                             rtol: float = RTOL, atol: float = ATOL) -> float:
    """``max{1/d_B(u), max 2/d(u, v) over v with f(v) = -f(u)}`` at a maximum point ``u``.

    For a limit-equation solution the Lipschitz bound forces the eigenvalue
    to be at least each term and the certifying path attains one of them.
    """
    f = as_node_function(g, f)
    _guard(g, f)
    M = float(np.max(np.abs(f)))
    i = int(np.argmax(np.abs(f))) if u is None else g.index[u]
    best = 1.0 / boundary_distance(g)[i]
    for j in range(g.n_interior):
        if j != i and abs(f[j] + f[i]) <= rtol * M + atol:
            best = max(best, 2.0 / g.distances[i, j])
    return float(best)
