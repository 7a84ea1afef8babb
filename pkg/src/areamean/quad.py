"""Scalar quadrature and numerical differentiation.

Integrands are called with numpy arrays of nodes where possible; a callable
that only accepts scalars is detected and evaluated point by point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

LOW_ORDER = 16
HIGH_ORDER = 32
MAX_DEPTH = 40
# panels whose two estimates agree to this many ulps of their magnitude are
# accepted even if the absolute tolerance is below the roundoff floor
ROUNDOFF_ULPS = 64.0


class QuadratureError(ArithmeticError):
    """Raised when an integrand is non-finite or the adaptive rule gives up.

    ``value`` and ``error_estimate`` carry the best result reached so far;
    ``node`` is the offending abscissa for non-finite evaluations.
    """

    def __init__(self, message, value=math.nan, error_estimate=math.inf, node=None):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate
        self.node = node


@dataclass(frozen=True)
class QuadResult:
    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be nonnegative")
        if self.evaluations < 1:
            raise ValueError("evaluations must be >= 1")


@lru_cache(maxsize=None)
def _legendre_rule(n: int):
    # Newton on P_n in extended precision; the arrays are frozen so the cache
    # can be shared between threads.
    k = np.arange(1, n + 1, dtype=np.longdouble)
    pi = np.longdouble(math.pi)
    x = np.cos(pi * (k - np.longdouble(0.25)) / (n + np.longdouble(0.5)))
    for _ in range(100):
        p0 = np.ones_like(x)
        p1 = x.copy()
        for j in range(2, n + 1):
            p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
        dp = n * (x * p1 - p0) / (x * x - 1)
        step = p1 / dp
        x = x - step
        if np.max(np.abs(step)) < 4 * np.finfo(np.longdouble).eps:
            break
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    dp = n * (x * p1 - p0) / (x * x - 1)
    w = 2 / ((1 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    xd, wd = x.astype(np.float64), w.astype(np.float64)
    for arr in (xd, wd):
        arr.setflags(write=False)
    return xd, wd


def legendre_nodes(n: int):
    """Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1]."""
    if n < 1:
        raise ValueError("node count must be >= 1")
    return _legendre_rule(int(n))


def _call(f, t):
    t = np.asarray(t, dtype=np.float64)
    try:
        with np.errstate(all="ignore"):
            v = np.asarray(f(t), dtype=np.float64)
        if v.shape == t.shape:
            return v
        if v.shape == ():
            # constant-valued lambdas such as ``lambda t: 1.0``
            return np.full(t.shape, float(v))
    except TypeError:
        pass
    return np.array([float(f(float(s))) for s in t.ravel()]).reshape(t.shape)


def _check_finite(values, nodes):
    bad = ~np.isfinite(values)
    if bad.any():
        node = float(np.asarray(nodes)[bad][0])
        raise QuadratureError(f"non-finite integrand at t={node!r}", node=node)


def _compensated_sum(values) -> float:
    return math.fsum(np.asarray(values, dtype=np.float64).ravel())


def gauss_legendre(f, a: float, b: float, n: int) -> float:
    """n-point Gauss-Legendre approximation of the integral of f over [a, b]."""
    if a > b:
        raise ValueError("require a <= b")
    nodes, weights = legendre_nodes(n)
    half = 0.5 * (b - a)
    t = 0.5 * (a + b) + half * nodes
    v = _call(f, t)
    _check_finite(v, t)
    return half * _compensated_sum(weights * v)


def _panel_estimates(f, lo, hi):
    """Low- and high-order estimates for a batch of panels [lo_i, hi_i]."""
    xl, wl = legendre_nodes(LOW_ORDER)
    xh, wh = legendre_nodes(HIGH_ORDER)
    mid = 0.5 * (lo + hi)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    t = np.concatenate([mid + half * xl, mid + half * xh], axis=1)
    v = _call(f, t)
    _check_finite(v, t)
    vl, vh = v[:, :LOW_ORDER], v[:, LOW_ORDER:]
    low = half[:, 0] * (vl @ wl)
    high = half[:, 0] * (vh @ wh)
    magnitude = half[:, 0] * (np.abs(vh) @ wh)
    return low, high, magnitude, t.size


def integrate_intervals(f, edges, tol: float = 1e-11, rtol: float = 0.0,
                        max_depth: int = MAX_DEPTH):
    """Adaptive integrals of f over each interval [edges[i], edges[i+1]].

    All pending panels of one bisection level are evaluated in a single call
    of ``f``.  A panel of width w is accepted once the difference between the
    16- and 32-point rules is at most ``tol * w / (edges[-1] - edges[0])``,
    ``rtol`` times its value, or the roundoff floor.

    Returns ``(values, errors, evaluations)`` with one entry per interval.
    """
    edges = np.asarray(edges, dtype=np.float64)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("need at least two edges")
    if np.any(np.diff(edges) < 0):
        raise ValueError("edges must be nondecreasing")
    if tol <= 0:
        raise ValueError("tol must be positive")
    span = edges[-1] - edges[0]
    nint = edges.size - 1
    values = np.zeros(nint, dtype=np.longdouble)
    errors = np.zeros(nint)
    evaluations = 0
    owner = np.arange(nint)
    lo, hi = edges[:-1].copy(), edges[1:].copy()
    keep = hi > lo
    owner, lo, hi = owner[keep], lo[keep], hi[keep]
    eps = np.finfo(np.float64).eps
    depth = 0
    while owner.size:
        low, high, magnitude, n_eval = _panel_estimates(f, lo, hi)
        evaluations += n_eval
        err = np.abs(high - low)
        allowed = np.maximum(tol * (hi - lo) / span, rtol * np.abs(high))
        done = (err <= allowed) | (err <= ROUNDOFF_ULPS * eps * magnitude)
        if depth >= max_depth:
            np.add.at(values, owner, high.astype(np.longdouble))
            np.add.at(errors, owner, err)
            worst = int(owner[np.argmax(err)])
            raise QuadratureError(
                f"maximum bisection depth {max_depth} exceeded on interval {worst}",
                value=np.asarray(values, dtype=np.float64),
                error_estimate=np.asarray(errors),
            )
        np.add.at(values, owner[done], high[done].astype(np.longdouble))
        np.add.at(errors, owner[done], err[done])
        todo = ~done
        owner, lo, hi = owner[todo], lo[todo], hi[todo]
        mid = 0.5 * (lo + hi)
        owner = np.concatenate([owner, owner])
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        depth += 1
    return values.astype(np.float64), errors, max(evaluations, 1)


def adaptive_integrate(f, a: float, b: float, tol: float = 1e-11,
                       max_depth: int = MAX_DEPTH, rtol: float = 0.0) -> QuadResult:
    """Adaptive bisection with per-panel 16/32-point Gauss-Legendre.

    Raises QuadratureError carrying the best value when ``max_depth`` is hit.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if a > b:
        raise ValueError("require a <= b")
    if a == b:
        return QuadResult(0.0, 0.0, 1)
    try:
        v, e, n = integrate_intervals(f, [a, b], tol, rtol=rtol, max_depth=max_depth)
    except QuadratureError as exc:
        if exc.node is None:
            raise QuadratureError(str(exc), value=float(np.sum(exc.value)),
                                  error_estimate=float(np.sum(exc.error_estimate))) from None
        raise
    return QuadResult(float(v[0]), float(e[0]), int(n))


def periodic_trapezoid(g, n: int) -> float:
    """Circle average (1/n) * sum g(2 pi j / n) of a 2*pi-periodic g."""
    if n < 4:
        raise ValueError("need at least 4 nodes")
    theta = 2.0 * np.pi * np.arange(n) / n
    v = _call(g, theta)
    return _compensated_sum(v) / n


def richardson_table(f, x, h0, stages: int = 8):
    """Central differences at steps h0 / 2**k and their Richardson tableau.

    ``x`` and ``h0`` broadcast; f is called once on the whole stencil.
    Returns the diagonal extrapolants with shape (stages, *x.shape).
    """
    x = np.asarray(x, dtype=np.float64)
    h0 = np.broadcast_to(np.asarray(h0, dtype=np.float64), x.shape)
    steps = h0[None, ...] / 2.0 ** np.arange(stages).reshape((-1,) + (1,) * x.ndim)
    stencil = np.stack([x + steps, x - steps])
    v = _call(f, stencil)
    if not np.all(np.isfinite(v)):
        bad = stencil[~np.isfinite(v)][0]
        raise ArithmeticError(f"non-finite value in difference stencil at t={float(bad)!r}")
    central = (v[0] - v[1]) / (2.0 * steps)
    table = [central[0]]
    diag = [central[0]]
    for k in range(1, stages):
        row = [central[k]]
        factor = 4.0
        for j in range(1, k + 1):
            row.append(row[j - 1] + (row[j - 1] - table[j - 1]) / (factor - 1.0))
            factor *= 4.0
        table = row
        diag.append(row[-1])
    return np.stack(diag)


def _best_extrapolant(diag, rtol):
    change = np.abs(np.diff(diag, axis=0))
    scale = np.maximum(np.abs(diag[1:]), np.finfo(np.float64).tiny)
    converged = change <= rtol * scale
    # first stage whose extrapolant agrees with the previous one; otherwise
    # the stage with the smallest change (roundoff eventually dominates)
    first = np.where(converged.any(axis=0), converged.argmax(axis=0), change.argmin(axis=0))
    idx = first + 1
    return np.take_along_axis(diag, idx[None, ...], axis=0)[0]


def richardson_derivative(f, x, h0: float = 1e-2, rtol: float = 1e-12, stages: int = 8):
    """Derivative of f at x by Richardson-extrapolated central differences.

    Works elementwise when ``x`` is an array.
    """
    if np.any(np.asarray(h0) <= 0):
        raise ValueError("h0 must be positive")
    diag = richardson_table(f, x, h0, stages)
    out = _best_extrapolant(diag, rtol)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def _jacobi_rule(n: int, s: float):
    from scipy.special import roots_jacobi

    x, w = roots_jacobi(n, 0.0, s)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def power_weighted(f, b: float, s: float, n: int = HIGH_ORDER) -> float:
    """Integral of t**s * f(t) over [0, b] by n-point Gauss-Jacobi."""
    if s <= -1:
        raise ValueError("power must exceed -1")
    x, w = _jacobi_rule(int(n), float(s))
    t = 0.5 * b * (1.0 + x)
    v = _call(f, t)
    _check_finite(v, t)
    return (0.5 * b) ** (s + 1) * _compensated_sum(w * v)
