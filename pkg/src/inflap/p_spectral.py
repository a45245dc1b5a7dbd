"""Finite-p machinery: the p-Laplacian, Rayleigh quotients and eigen-solvers.

Large exponents are handled in the log domain. Every node equation

    sum_v w_uv^p |f(u) - f(v)|^(p-2) (f(u) - f(v)) = L^p |f(u)|^(p-2) f(u)

is divided by its largest term before it is evaluated, so the solvers work
with per-node relative residuals; ``L = lambda^(1/p)`` is carried instead of
``lambda`` itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidExponent, ZeroFunction, ZeroInit
from .graph import Graph, as_node_function, boundary_distance, gradient, norm_p

LSE_THRESHOLD = 32.0
P_MAX = 512.0


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_newton: int = 60
    descent_steps: int = 200
    armijo: float = 1e-4
    min_step: float = 1e-14
    max_substeps: int = 8


@dataclass
class Eigenpair:
    """Eigenfunction normalised to ``max |f| = 1`` with ``lam`` and ``root = lam^(1/p)``."""

    f: np.ndarray
    lam: float
    root: float
    p: float
    converged: bool = True


@dataclass
class PSweepRecord:
    p: float
    lam: float
    lam_root: float
    residual: float
    iterations: int
    f: np.ndarray = field(repr=False)
    converged: bool = True

    def row(self) -> dict:
        return {
            "p": self.p,
            "lambda": self.lam,
            "lambda_root": self.lam_root,
            "residual": self.residual,
            "iterations": self.iterations,
        }


def _check_p(p, lo=2.0):
    if not (math.isfinite(p) and p >= lo):
        raise InvalidExponent(f"p must be finite and >= {lo}, got {p}")


def _interior_arcs(g: Graph):
    sel = g.tails < g.n_interior
    return g.tails[sel], g.heads[sel], g.arc_weights[sel]


def _phi(x, q):
    """``|x|^q sign(x)`` (``q = p - 1``)."""
    return np.sign(x) * np.abs(x) ** q


def delta_p(g: Graph, f, p: float) -> np.ndarray:
    """p-Laplacian ``sum_v w^p |f(u)-f(v)|^(p-2) (f(u)-f(v))`` on interior nodes."""
    _check_p(p)
    f = as_node_function(g, f)
    full = g.extend(f)
    t, h, w = _interior_arcs(g)
    d = full[t] - full[h]
    n = g.n_interior
    if p <= LSE_THRESHOLD:
        out = np.zeros(n)
        np.add.at(out, t, w**p * _phi(d, p - 1))
        return out
    # descent minus ascent magnitudes, each a log-sum-exp of (p-1)-norm terms
    with np.errstate(divide="ignore"):
        logs = p * np.log(w) + (p - 1) * np.log(np.abs(d))
    out = np.zeros(n)
    for u in range(n):
        mine = t == u
        pos = logs[mine & (d > 0)]
        neg = logs[mine & (d < 0)]
        out[u] = (math.exp(logsumexp(pos)) if pos.size else 0.0) - (
            math.exp(logsumexp(neg)) if neg.size else 0.0
        )
    return out


def _log_norm_p(x: np.ndarray, p: float, half=False) -> float:
    """``log ||x||_p^p`` (with the optional edge factor 1/2)."""
    ax = np.abs(x)
    ax = ax[ax > 0]
    if ax.size == 0:
        return -math.inf
    val = logsumexp(p * np.log(ax))
    return val - math.log(2.0) if half else val


def rayleigh_p(g: Graph, f, p: float) -> float:
    """``||grad f||_p / ||f||_p``; ``p = inf`` uses the max norms."""
    if not (p == math.inf or p >= 2):
        raise InvalidExponent(f"p must be in [2, inf], got {p}")
    f = as_node_function(g, f)
    if not np.any(f):
        raise ZeroFunction("Rayleigh quotient of the zero function")
    return norm_p(gradient(g, f), p) / norm_p(f, p)


def descent_direction(g: Graph, f, p: float) -> np.ndarray:
    """``-(Delta_p f - R_p(f)^p |f|^(p-2) f)``; proportional to ``-grad R_p``."""
    f = as_node_function(g, f)
    lam = rayleigh_p(g, f, p) ** p
    return -(delta_p(g, f, p) - lam * _phi(f, p - 1))


def _scaled_system(g: Graph, f: np.ndarray, root: float, p: float, jacobian=True):
    """Per-node scaled residual and Jacobian w.r.t. ``(f, root)``.

    Row ``u`` is divided by ``exp(c_u)``, the magnitude of its largest term.
    """
    n = g.n_interior
    t, h, w = _interior_arcs(g)
    full = g.extend(f)
    d = full[t] - full[h]
    with np.errstate(divide="ignore"):
        logd = np.log(np.abs(d))
        logf = np.log(np.abs(f))
    lw = np.log(w)
    lr = math.log(root)
    log_arc = p * lw + (p - 1) * logd
    log_lam = p * lr + (p - 1) * logf

    c = log_lam.copy()
    np.maximum.at(c, t, log_arc)
    c[~np.isfinite(c)] = 0.0

    F = -np.sign(f) * np.exp(log_lam - c)
    np.add.at(F, t, np.sign(d) * np.exp(log_arc - c[t]))
    if not jacobian:
        return F, None

    if p == 2:
        a_arc = 2 * lw
        a_lam = np.full(n, 2 * lr)
    else:
        a_arc = p * lw + (p - 2) * logd
        a_lam = p * lr + (p - 2) * logf
    arc_d = (p - 1) * np.exp(a_arc - c[t])
    J = np.zeros((n, n + 1))
    diag = -(p - 1) * np.exp(a_lam - c)
    np.add.at(diag, t, arc_d)
    J[np.arange(n), np.arange(n)] = diag
    inner = h < n
    np.add.at(J, (t[inner], h[inner]), -arc_d[inner])
    J[:, n] = -p * np.sign(f) * np.exp(log_lam - c - lr)
    return F, J


def eigen_residual_p(g: Graph, f, lam: float, p: float, *, scaled: bool = False) -> float:
    """Eigen-equation residual after normalising ``max |f| = 1``.

    The raw form is ``max_u |Delta_p f(u) - lam |f(u)|^(p-2) f(u)|``; with
    ``scaled`` each node's residual is relative to its largest term, which is
    the form the solvers converge on.
    """
    _check_p(p)
    f = as_node_function(g, f)
    top = np.max(np.abs(f))
    if top == 0:
        raise ZeroFunction("residual of the zero function")
    f = f / top
    if scaled:
        if lam <= 0:
            raise ValueError("scaled residual needs lam > 0")
        root = math.exp(math.log(lam) / p)
        F, _ = _scaled_system(g, f, root, p, jacobian=False)
        return float(np.max(np.abs(F)))
    return float(np.max(np.abs(delta_p(g, f, p) - lam * _phi(f, p - 1))))


def eigenvalue_log_bound(g: Graph, p: float) -> float:
    """``log`` of ``max_u 2^(p-1) sum_v w_uv^p``, a bound on every eigenvalue."""
    t, _, w = _interior_arcs(g)
    best = -math.inf
    for u in range(g.n_interior):
        ws = w[t == u]
        if ws.size:
            best = max(best, logsumexp(p * np.log(ws)))
    return (p - 1) * math.log(2.0) + best


def _lam_from_root(root: float, p: float) -> float:
    try:
        return root**p
    except OverflowError:
        return math.inf


def _normalise(f):
    # the entry of largest magnitude becomes +1
    return f / f[np.argmax(np.abs(f))]


def _laplacian_2(g: Graph) -> np.ndarray:
    n = g.n_interior
    L = np.zeros((n, n))
    for a, b, w in zip(g.edge_u, g.edge_v, g.weights):
        w2 = w * w
        if a < n:
            L[a, a] += w2
        if b < n:
            L[b, b] += w2
        if a < n and b < n:
            L[a, b] -= w2
            L[b, a] -= w2
    return L


def linear_eigenpairs(g: Graph):
    """All p = 2 eigenpairs (ascending) of the interior stiffness matrix."""
    vals, vecs = np.linalg.eigh(_laplacian_2(g))
    return vals, vecs


def newton_eigenpair(g: Graph, f0, root0: float, p: float, opts: SolverOptions | None = None):
    """Damped Newton on the scaled eigen-equation, starting from ``(f0, root0)``.

    The entry of largest magnitude is pinned. Returns ``(f, root, residual,
    iterations, converged)``.
    """
    opts = opts or SolverOptions()
    f = _normalise(np.asarray(f0, dtype=float).copy())
    root = float(root0)
    n = g.n_interior
    k = int(np.argmax(np.abs(f)))
    free = np.array([i for i in range(n + 1) if i != k])

    F, J = _scaled_system(g, f, root, p)
    # line search on the least-squares merit, convergence on the max-norm
    merit = float(F @ F)
    it = 0
    while np.max(np.abs(F)) > opts.tol and it < opts.max_newton:
        it += 1
        A = J[:, free]
        try:
            step = np.linalg.solve(A, -F)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(A, -F, rcond=None)[0]
        full_step = np.zeros(n + 1)
        full_step[free] = step
        alpha = 1.0
        accepted = False
        while alpha > 1e-10:
            nf = f + alpha * full_step[:n]
            nr = root + alpha * full_step[n]
            if nr > 0 and np.all(np.isfinite(nf)):
                nF, nJ = _scaled_system(g, nf, nr, p)
                nm = float(nF @ nF)
                if np.isfinite(nm) and nm < merit:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            break
        f, root, F, J, merit = nf, nr, nF, nJ, nm
    res = float(np.max(np.abs(F)))
    return f, root, res, it, res <= opts.tol


def _descend(g: Graph, f: np.ndarray, p: float, opts: SolverOptions):
    """Armijo gradient descent on ``log R_p`` with ``||f||_p = 1`` renormalisation."""
    t, h, w = _interior_arcs(g)
    n = g.n_interior

    def log_r(x):
        ge = gradient(g, x).values
        return (_log_norm_p(ge, p, half=True) - _log_norm_p(x, p)) / p

    def direction(x):
        full = g.extend(x)
        d = full[t] - full[h]
        ge = gradient(g, x).values
        log_n = _log_norm_p(ge, p, half=True)
        with np.errstate(divide="ignore"):
            terms = np.sign(d) * np.exp(p * np.log(w) + (p - 1) * np.log(np.abs(d)) - log_n)
        lap = np.zeros(n)
        np.add.at(lap, t, terms)
        return -(lap - _phi(x, p - 1))

    def renorm(x):
        return x / math.exp(_log_norm_p(x, p) / p)

    f = renorm(f)
    cur = log_r(f)
    step = 1.0
    steps = 0
    for steps in range(1, opts.descent_steps + 1):
        dirn = direction(f)
        slope = float(dirn @ dirn)
        if not np.isfinite(slope) or slope <= 1e-16:
            break
        while step > opts.min_step:
            trial = f + step * dirn
            if np.any(trial):
                trial = renorm(trial)
                val = log_r(trial)
                if val <= cur - opts.armijo * step * slope:
                    break
            step *= 0.5
        else:
            break
        f, cur = trial, val
        step = min(1.0, 2 * step)
    return f, steps


def _linear_start(g: Graph, f: np.ndarray):
    """Lowest p = 2 eigenpair with a non-negligible component along ``f``."""
    vals, vecs = linear_eigenpairs(g)
    overlap = np.abs(vecs.T @ f)
    j = int(np.argmax(overlap > 1e-8 * np.linalg.norm(f)))
    return _normalise(vecs[:, j]), math.sqrt(max(vals[j], 0.0))


def minimize_rayleigh(g: Graph, p: float, init, opts: SolverOptions | None = None):
    """Local eigen-solver for the p-Rayleigh quotient started at ``init``.

    p = 2 is solved exactly (dense symmetric eigensolver, lowest eigenpair
    present in ``init``). For p > 2: Armijo descent on ``log R_p`` and a
    Newton polish, accepted if it does not raise the quotient; otherwise the
    p = 2 eigenpair selected by ``init`` is continued up to ``p``. Returns
    ``(Eigenpair, PSweepRecord)``; a run that misses the tolerance comes back
    flagged ``converged=False``.
    """
    opts = opts or SolverOptions()
    _check_p(p)
    if p > P_MAX:
        raise InvalidExponent(f"p must be <= {P_MAX}, got {p}")
    f = as_node_function(g, init).copy()
    if not np.any(f):
        raise ZeroInit("initial function is identically zero")
    f = _normalise(f)

    root = rayleigh_p(g, f, p)
    F, _ = _scaled_system(g, f, root, p, jacobian=False)
    if np.max(np.abs(F)) <= opts.tol:
        return _package(g, f, root, p, float(np.max(np.abs(F))), 0, True)

    if p == 2:
        f, root = _linear_start(g, f)
        f, root, res, nit, ok = newton_eigenpair(g, f, root, p, opts)
        return _package(g, f, root, p, res, 1 + nit, ok)

    iters = 0
    start = f
    if opts.descent_steps > 0:
        f, iters = _descend(g, f, p, opts)
        f = _normalise(f)
    ceiling = rayleigh_p(g, f, p)
    nf, nr, res, nit, ok = newton_eigenpair(g, f, ceiling, p, opts)
    iters += nit
    if ok and nr <= ceiling * (1 + 1e-9):
        return _package(g, nf, nr, p, res, iters, True)
    best = (nf, nr, res)

    # fall back on continuation in p from the linear problem
    f, root = _linear_start(g, start)
    prev = 2.0
    steps = [q for q in default_schedule(p) if 2 < q < p] + [p]
    for q in steps:
        f, root, res, nit, ok = _continue(g, f, root, prev, q, opts)
        iters += nit
        if not ok:
            break
        f, prev = _normalise(f), q
    if ok:
        return _package(g, f, root, p, res, iters, True)
    return _package(g, best[0], best[1], p, best[2], iters, False)


def _package(g, f, root, p, res, iters, ok):
    f = _normalise(f)
    lam = _lam_from_root(root, p)
    pair = Eigenpair(f=f, lam=lam, root=root, p=p, converged=ok)
    rec = PSweepRecord(p=p, lam=lam, lam_root=root, residual=res, iterations=iters, f=f, converged=ok)
    return pair, rec


def default_schedule(pmax: float = 128) -> list[float]:
    out, p = [], 2.0
    while p <= pmax:
        out.append(p)
        p *= 2
    return out


def _continue(g, f, root, p_from, p_to, opts, depth=0):
    """Newton continuation from an eigenpair at ``p_from`` to ``p_to``.

    Failed jumps are split at the midpoint up to ``opts.max_substeps`` times.
    """
    guess = rayleigh_p(g, f, p_to)
    nf, nr, res, it, ok = newton_eigenpair(g, f, guess, p_to, opts)
    if not ok and opts.descent_steps > 0:
        # Newton stalls where neighbours tie exactly; descent breaks the tie
        df, dit = _descend(g, f, p_to, opts)
        df = _normalise(df)
        tf, tr, tres, tit, tok = newton_eigenpair(g, df, rayleigh_p(g, df, p_to), p_to, opts)
        it += dit + tit
        if tok and np.array_equal(np.sign(_normalise(tf)), np.sign(f)):
            return tf, tr, tres, it, True
    if ok or depth >= opts.max_substeps:
        return nf, nr, res, it, ok
    mid = 0.5 * (p_from + p_to)
    mf, mr, _, it1, ok1 = _continue(g, f, root, p_from, mid, opts, depth + 1)
    if not ok1:
        return mf, mr, res, it + it1, False
    nf, nr, res, it2, ok = _continue(g, mf, mr, mid, p_to, opts, depth + 1)
    return nf, nr, res, it + it1 + it2, ok


def p_sweep(g: Graph, schedule=None, mode: str = "first", opts: SolverOptions | None = None):
    """Warm-started eigenpair continuation along an increasing p-schedule.

    ``mode="first"`` starts from the boundary distance (a positive function);
    ``mode="second"`` starts from the second p = 2 eigenvector and follows its
    sign-changing branch. A non-converged entry ends the sweep and is the last
    record returned.
    """
    opts = opts or SolverOptions()
    schedule = list(default_schedule() if schedule is None else schedule)
    if not schedule or schedule[0] != 2:
        raise InvalidExponent("schedule must start at p = 2")
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise InvalidExponent("schedule must be strictly increasing")
    if mode not in ("first", "second"):
        raise ValueError(f"unknown mode {mode!r}")

    if mode == "first":
        init = boundary_distance(g)
        if not np.all(np.isfinite(init)):
            init = np.ones(g.n_interior)
        pair, rec = minimize_rayleigh(g, 2.0, init, opts)
    else:
        if g.n_interior < 2:
            raise ValueError("second eigenpair needs at least two interior nodes")
        vals, vecs = linear_eigenpairs(g)
        pair, rec = minimize_rayleigh(g, 2.0, vecs[:, 1], opts)

    records = [rec]
    f, root, p_prev = pair.f, pair.root, 2.0
    for p in schedule[1:]:
        if not rec.converged:
            break
        _check_p(p)
        nf, nr, res, it, ok = _continue(g, f, root, p_prev, p, opts)
        nf = _normalise(nf)
        rec = PSweepRecord(
            p=p, lam=_lam_from_root(nr, p), lam_root=nr, residual=res,
            iterations=it, f=nf, converged=ok,
        )
        records.append(rec)
        f, root, p_prev = nf, nr, p

    if mode == "first":
        roots = [r.lam_root for r in records if r.converged]
        if any(b > a * (1 + 1e-9) for a, b in zip(roots, roots[1:])):
            warnings.warn("first-mode sweep: lambda^(1/p) is not monotonically decreasing")
    return records
