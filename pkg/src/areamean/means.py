"""Circle means, weight integrals and area integral means.

Everything is expressed in the variable x = r**2.  ``M(x)`` is the circle
mean of |f|**p on radius sqrt(x), ``phi(x)`` the integral of (1-t)**alpha
over [0, x] and ``h(x)`` the same integral weighted by M.  The area mean is
h/phi.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .quad import (
    HIGH_ORDER,
    LOW_ORDER,
    QuadratureError,
    QuadResult,
    _best_extrapolant,
    integrate_intervals,
    power_weighted,
    richardson_table,
)
from .series import PowerSeries, derivative

BRANCH_EPS = 1e-8
X_MIN = 1e-4
X_MAX = 0.999
H_TOL = 1e-11
# trapezoid error decays like exp(-n * w) for strip half-width w
STRIP_DIGITS = 36.0
CHUNK = 2 ** 21


@dataclass(frozen=True)
class Params:
    p: float
    alpha: float

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"p must be positive and finite, got {self.p!r}")
        if not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")

    @property
    def is_theorem_range(self) -> bool:
        return -2.0 <= self.alpha <= 0.0


@dataclass(frozen=True)
class MeansPoint:
    x: float
    M: float
    Mp: float
    h: float
    h_err: float
    phi: float
    phi_prime: float
    derivative_fallback: bool = False


# -- angular discretisation -------------------------------------------------
#
# A zero z_j of f puts a singularity of theta -> |f(r e^{i theta})|**p at
# complex distance |log(|z_j| / r)| from the real axis.  Far zeros leave the
# trapezoid rule spectrally accurate; near ones get a graded composite
# Gauss-Legendre rule that refines geometrically toward arg z_j.

TRAPEZOID_MAX = 1024
SPLIT_WIDTH = 0.1
GRADING = 0.35
GRADED_ORDER = 16
MAX_LEVELS = 60


def base_node_count(f: PowerSeries, p: float) -> int:
    deg = f.degree
    n = max(64, 8 * (deg + 1))
    if _is_even_integer(p):
        n = max(n, int(p * deg / 2) + 1)
    return n


def _is_even_integer(p: float) -> bool:
    return float(p).is_integer() and int(p) % 2 == 0


def _pow2(n: float) -> int:
    return int(2 ** math.ceil(math.log2(n)))


@lru_cache(maxsize=64)
def _trapezoid_rule(n: int):
    theta = 2 * np.pi * np.arange(n) / n
    w = np.full(n, 1.0 / n)
    theta.setflags(write=False)
    w.setflags(write=False)
    return theta, w


class _CircleRules:
    """Quadrature rules for circle averages of one series and exponent."""

    def __init__(self, f: PowerSeries, p: float):
        self.base = base_node_count(f, p)
        self.smooth = _is_even_integer(p) or f.is_constant()
        roots = np.zeros(0, dtype=complex) if self.smooth else f.roots()
        roots = roots[np.abs(roots) > 0]
        self.mods = np.abs(roots)
        self.angles = np.mod(np.angle(roots), 2 * np.pi)
        from .quad import legendre_nodes

        self.gl_x, self.gl_w = legendre_nodes(GRADED_ORDER)

    def widths(self, r):
        r = np.asarray(r, dtype=np.float64)
        if self.mods.size == 0:
            return np.full(r.shape, np.inf)
        with np.errstate(divide="ignore"):
            return np.min(np.abs(np.log(self.mods[None, :] / r.reshape(-1, 1))), axis=1).reshape(r.shape)

    def trapezoid_count(self, width):
        if not width < STRIP_DIGITS / self.base:
            return self.base
        return _pow2(STRIP_DIGITS / width)

    def rule(self, r: float):
        return self.rules(np.array([r]))[0]

    def rules(self, r):
        """One (theta, weight) pair per radius in ``r``."""
        r = np.asarray(r, dtype=np.float64).ravel()
        if self.mods.size == 0:
            return [_trapezoid_rule(self.base)] * r.size
        with np.errstate(divide="ignore"):
            dist = np.abs(np.log(self.mods[None, :] / r[:, None]))
        dmin = dist.min(axis=1)
        out = []
        for i, w in enumerate(dmin.tolist()):
            if w >= STRIP_DIGITS / TRAPEZOID_MAX:
                out.append(_trapezoid_rule(self.trapezoid_count(w)))
            else:
                out.append(self._graded(dist[i]))
        return out

    def _graded(self, d):
        near = d < SPLIT_WIDTH
        far = d[~near]
        hmax = min(1.5 * float(far.min()), 0.5) if far.size else 0.5
        order = np.argsort(self.angles[near])
        ang = self.angles[near][order].tolist()
        dist = d[near][order].tolist()
        two_pi = 2 * math.pi
        cuts = []
        m = len(ang)
        for i in range(m):
            a, b = ang[i], ang[(i + 1) % m] + (two_pi if i + 1 >= m else 0.0)
            half = 0.5 * (b - a)
            if half <= 0:
                continue
            cuts.append(_graded_points(a, half, dist[i], +1))
            cuts.append(_graded_points(b, half, dist[(i + 1) % m], -1))
        edges = np.unique(np.concatenate(cuts))
        lengths = np.diff(edges)
        pieces = np.maximum(1, np.ceil(lengths / hmax)).astype(np.int64)
        owner = np.repeat(np.arange(lengths.size), pieces)
        first = np.repeat(np.cumsum(pieces) - pieces, pieces)
        step = (lengths / pieces)[owner]
        lo = (edges[:-1][owner] + (np.arange(owner.size) - first) * step)[:, None]
        half = 0.5 * step[:, None]
        theta = (lo + half + half * self.gl_x).ravel()
        w = (half * self.gl_w).ravel() / two_pi
        return theta, w


def _graded_points(a, half, dist, direction):
    """Element boundaries a, a + half*s**K, ..., a + half*s, a + half."""
    if dist <= 0:
        levels = MAX_LEVELS
    else:
        levels = int(min(MAX_LEVELS, max(0, math.ceil(math.log(dist / half) / math.log(GRADING)))))
    offs = half * GRADING ** np.arange(levels, -1, -1, dtype=np.float64)
    return a + direction * np.concatenate([[0.0], offs])


@lru_cache(maxsize=256)
def _rules(f: PowerSeries, p: float) -> _CircleRules:
    return _CircleRules(f, p)


def angular_node_count(f: PowerSeries, p: float, r):
    """Number of angular nodes used at each radius."""
    r = np.atleast_1d(np.asarray(r, dtype=np.float64))
    rules = _rules(f, float(p)).rules(r)
    return np.array([t.size for t, _ in rules]).reshape(r.shape)


def _horner(coeffs, z):
    acc = np.full(z.shape, coeffs[-1], dtype=np.complex128)
    for a in coeffs[-2::-1]:
        acc *= z
        acc += a
    return acc


def _circle_average(f: PowerSeries, p: float, r, kind: str, nodes=None):
    """Average over the circle of |f|**p ('value') or of the d/dx integrand."""
    r = np.asarray(r, dtype=np.float64)
    flat = r.ravel()
    if nodes is not None:
        rule_list = [_trapezoid_rule(int(nodes))] * flat.size
    else:
        rule_list = _rules(f, float(p)).rules(flat)
    coeffs = f.coeffs
    dcoeffs = derivative(f).coeffs
    out = np.empty(flat.size, dtype=np.float64)
    start = 0
    while start < flat.size:
        stop, total = start, 0
        while stop < flat.size and (total == 0 or total + rule_list[stop][0].size <= CHUNK):
            total += rule_list[stop][0].size
            stop += 1
        block = rule_list[start:stop]
        sizes = np.array([b[0].size for b in block])
        owner = np.repeat(np.arange(stop - start), sizes)
        theta = np.concatenate([b[0] for b in block])
        weight = np.concatenate([b[1] for b in block])
        e = np.exp(1j * theta)
        z = flat[start:stop][owner] * e
        fz = _horner(coeffs, z)
        mod2 = fz.real ** 2 + fz.imag ** 2
        if kind == "value":
            vals = mod2 if p == 2 else mod2 ** (0.5 * p)
        else:
            dfz = _horner(dcoeffs, z)
            proj = (np.conj(fz) * dfz * e).real
            with np.errstate(divide="ignore", invalid="ignore"):
                vals = np.where(mod2 > 0, p * mod2 ** (0.5 * p - 1.0) * proj, 0.0)
        out[start:stop] = np.bincount(owner, weights=weight * vals, minlength=stop - start)
        start = stop
    out = out.reshape(r.shape)
    if kind != "value":
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out / (2.0 * r)
    return out


def _out(v):
    v = np.asarray(v)
    return float(v) if v.ndim == 0 else v


# -- circle means -------------------------------------------------------------

def circle_mean(f: PowerSeries, p: float, r, nodes=None):
    """M_p(f, r): mean of |f(r e^{i theta})|**p over the circle."""
    if p <= 0:
        raise ValueError("p must be positive")
    r = np.asarray(r, dtype=np.float64)
    if np.any((r < 0) | (r >= 1)):
        raise ValueError("radius must lie in [0, 1)")
    if f.is_constant():
        return _out(np.full(r.shape, abs(f.coeffs[0]) ** p))
    return _out(_circle_average(f, p, r, "value", nodes))


def circle_mean_exact_p2(f: PowerSeries, x):
    """Parseval: sum |a_k|**2 x**k."""
    x = np.asarray(x, dtype=np.float64)
    acc = np.zeros_like(x)
    for a in reversed(f.coeffs):
        acc = acc * x + abs(a) ** 2
    return _out(acc)


def M_of_x(f: PowerSeries, p: float, x, nodes=None):
    x = np.asarray(x, dtype=np.float64)
    return circle_mean(f, p, np.sqrt(x), nodes)


def _fallback_step(x):
    return 0.125 * np.minimum(np.minimum(x, 1.0 - x), 0.08)


def M_prime(f: PowerSeries, p: float, x):
    """dM/dx, under the integral sign for p > 1 and by Richardson otherwise."""
    return _out(_m_prime(f, p, np.asarray(x, dtype=np.float64))[0])


def _m_prime(f, p, x):
    """Derivative values plus a flag marking fallback points where f vanishes on the circle."""
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("x must lie in (0, 1)")
    none = np.zeros(x.shape, dtype=bool)
    if f.is_constant():
        return np.zeros(x.shape), none
    r = np.sqrt(x)
    if p > 1:
        return _circle_average(f, p, r, "deriv"), none

    def m(t):
        return _circle_average(f, p, np.sqrt(t), "value")

    diag = richardson_table(m, x, _fallback_step(x), 8)
    flagged = _rules(f, float(p)).widths(r) < 1e-12
    return _best_extrapolant(diag, 1e-12), flagged


# -- weight integrals ---------------------------------------------------------

def _check_x(x):
    if np.any(np.asarray(x) >= 1):
        raise ValueError("x must be < 1")
    if np.any(np.asarray(x) < 0):
        raise ValueError("x must be >= 0")


def phi(alpha, x):
    """Integral of (1-t)**alpha over [0, x]."""
    _check_x(x)
    x = np.asarray(x) if isinstance(x, np.ndarray) else np.asarray(x, dtype=np.float64)
    eps = alpha + 1
    ell = np.log1p(-x)
    if abs(eps) <= BRANCH_EPS:
        # removable singularity at alpha = -1
        return _out(-ell - 0.5 * eps * ell * ell)
    return _out(-np.expm1(eps * ell) / eps)


def phi_prime(alpha, x):
    _check_x(x)
    x = np.asarray(x) if isinstance(x, np.ndarray) else np.asarray(x, dtype=np.float64)
    return _out((1 - x) ** alpha)


def phi_second(alpha, x):
    _check_x(x)
    x = np.asarray(x) if isinstance(x, np.ndarray) else np.asarray(x, dtype=np.float64)
    return _out(-alpha * (1 - x) ** (alpha - 1))


def phi_minus_x(alpha, x):
    """phi(x) - x without the cancellation of the direct difference.

    Binomial series for x <= 0.3; above that a closed form that stays
    accurate for small alpha, or the plain difference near alpha = -1.
    """
    _check_x(x)
    x = np.asarray(x) if isinstance(x, np.ndarray) else np.asarray(x, dtype=np.float64)
    if alpha == 0:
        return _out(np.zeros_like(x))
    if abs(alpha + 1) > 0.5:
        # (1-x)**(alpha+1) = (1-x)(1 + expm1(alpha log(1-x))) keeps small alpha accurate
        direct = -(alpha * x + (1 - x) * np.expm1(alpha * np.log1p(-x))) / (alpha + 1)
    else:
        direct = np.asarray(phi(alpha, x)) - x
    small = x <= 0.3
    if not np.any(small):
        return _out(direct)
    xs = np.where(small, x, 0)
    total = np.zeros_like(xs)
    coef = np.ones_like(xs)
    power = np.ones_like(xs)
    for j in range(1, 2000):
        coef = coef * ((j - 1 - alpha) / j)
        power = power * xs
        term = coef * power / (j + 1)
        total = total + term
        if np.all(np.abs(term) <= 1e-22 * np.abs(total)) and j > 4:
            break
    return _out(np.where(small, xs * total, direct))


# -- profiles ----------------------------------------------------------------

@dataclass(frozen=True)
class MeanProfile:
    """A positive function M of x with its derivative, both vectorised.

    ``second`` is optional.  ``constant`` short-circuits h = M * phi.  When
    M(x) = x**origin_power * reduced(x) with ``reduced`` smooth at 0, the
    first quadrature interval uses a Gauss-Jacobi rule for that power.
    """

    value: Callable
    derivative: Callable
    label: str = "M"
    second: Callable | None = None
    constant: bool = False
    origin_power: float = 0.0
    reduced: Callable | None = None


class _PointMemo:
    """Memo of a vectorised function keyed by exact float64 arguments.

    Values at a point do not depend on the batch they were computed in, so
    cached results are bit-identical to fresh ones.  Insertion stops at
    ``limit`` entries.
    """

    def __init__(self, fn, limit: int = 1 << 20):
        self.fn = fn
        self.limit = limit
        self.keys = np.empty(0)
        self.vals = np.empty(0)
        self.lock = threading.Lock()

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        flat = x.ravel()
        with self.lock:
            keys, vals = self.keys, self.vals
        out = np.empty(flat.size)
        if keys.size:
            idx = np.minimum(np.searchsorted(keys, flat), keys.size - 1)
            hit = keys[idx] == flat
            out[hit] = vals[idx[hit]]
        else:
            hit = np.zeros(flat.size, dtype=bool)
        if not hit.all():
            new_x, inverse = np.unique(flat[~hit], return_inverse=True)
            new_v = np.asarray(self.fn(new_x), dtype=np.float64).reshape(new_x.shape)
            out[~hit] = new_v[inverse]
            with self.lock:
                if self.keys.size + new_x.size <= self.limit:
                    k = np.concatenate([self.keys, new_x])
                    v = np.concatenate([self.vals, new_v])
                    k, first = np.unique(k, return_index=True)
                    self.keys, self.vals = k, v[first]
        return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)


def _leading_order(f: PowerSeries) -> int:
    return next(k for k, a in enumerate(f.coeffs) if a != 0)


@lru_cache(maxsize=128)
def series_profile(f: PowerSeries, p: float) -> MeanProfile:
    if f.is_constant():
        c = abs(f.coeffs[0]) ** p
        return MeanProfile(
            value=lambda x: np.full(np.shape(x), c) if np.ndim(x) else c,
            derivative=lambda x: np.zeros(np.shape(x)) if np.ndim(x) else 0.0,
            label=f.label(),
            constant=True,
        )
    k = _leading_order(f)
    reduced = None
    if k > 0:
        g = PowerSeries(f.coeffs[k:])
        reduced = _PointMemo(lambda x: M_of_x(g, p, x))
    return MeanProfile(
        value=_PointMemo(lambda x: M_of_x(f, p, x)),
        derivative=lambda x: M_prime(f, p, x),
        label=f.label(),
        origin_power=0.5 * k * p,
        reduced=reduced,
    )


def _origin_piece(profile, alpha, b, tol, span):
    """Integral over [0, c] by Gauss-Jacobi for the x**s factor, with c <= b.

    c shrinks until the 16- and 32-point rules agree; the remainder [c, b]
    is left to the adaptive rule.
    """
    s = profile.origin_power

    def g(t):
        return np.asarray(profile.reduced(t)) * (1.0 - t) ** alpha

    c = b
    for _ in range(30):
        hi = power_weighted(g, c, s, HIGH_ORDER)
        lo = power_weighted(g, c, s, LOW_ORDER)
        err = abs(hi - lo)
        if err <= tol * c / span or err <= 64 * np.finfo(float).eps * abs(hi):
            return hi, err, c
        c /= 8.0
    raise QuadratureError("origin singularity not resolved", value=hi, error_estimate=err)


def profile_h(profile: MeanProfile, alpha: float, x, tol: float = H_TOL):
    """h at every x (any order) by cumulative adaptive quadrature.

    Returns ``(h, err)`` arrays.
    """
    x = np.asarray(x, dtype=np.float64)
    flat = x.ravel()
    if np.any((flat <= 0) | (flat >= 1)):
        raise ValueError("x must lie in (0, 1)")
    if profile.constant:
        c = float(profile.value(0.5))
        return c * np.asarray(phi(alpha, x)), np.zeros(x.shape)
    order = np.argsort(flat, kind="stable")
    xs = flat[order]
    head, head_err, start = 0.0, 0.0, 0.0
    if profile.reduced is not None and profile.origin_power > 0:
        head, head_err, start = _origin_piece(profile, alpha, xs[0], tol, xs[-1])
    edges = np.concatenate([[start], xs]) if start < xs[0] else np.concatenate([[start], xs[1:]])

    def integrand(t):
        return np.asarray(profile.value(t)) * (1.0 - t) ** alpha

    if edges.size > 1:
        pieces, errs, _ = integrate_intervals(integrand, edges, tol)
    else:
        pieces, errs = np.zeros(0), np.zeros(0)
    if start >= xs[0]:
        pieces = np.concatenate([[0.0], pieces])
        errs = np.concatenate([[0.0], errs])
    pieces = pieces.astype(np.longdouble)
    pieces[0] += np.longdouble(head)
    h_sorted = np.cumsum(pieces).astype(np.float64)
    e_sorted = np.cumsum(errs) + head_err
    h = np.empty_like(flat)
    e = np.empty_like(flat)
    h[order] = h_sorted
    e[order] = e_sorted
    return h.reshape(x.shape), e.reshape(x.shape)


def h_of_x(f: PowerSeries, p: float, alpha: float, x: float, tol: float = H_TOL) -> QuadResult:
    """h(x) with its error estimate; the quadrature runs over [0, x]."""
    if not 0 < x < 1:
        raise ValueError("x must lie in (0, 1)")
    h, err = profile_h(series_profile(f, p), alpha, np.array([x]), tol)
    return QuadResult(float(h[0]), float(err[0]), 1)


def h_prime(f: PowerSeries, p: float, alpha: float, x):
    x = np.asarray(x, dtype=np.float64)
    return _out(np.asarray(M_of_x(f, p, x)) * (1 - x) ** alpha)


def h_second(f: PowerSeries, p: float, alpha: float, x):
    x = np.asarray(x, dtype=np.float64)
    m = np.asarray(M_of_x(f, p, x))
    mp = np.asarray(M_prime(f, p, x))
    return _out(((1 - x) * mp - alpha * m) * (1 - x) ** (alpha - 1))


def area_mean(f: PowerSeries, p: float, alpha: float, r, tol: float = H_TOL):
    """M_{p,alpha}(f, r) = h(r**2) / phi(r**2)."""
    r = np.asarray(r, dtype=np.float64)
    if np.any((r <= 0) | (r >= 1)):
        raise ValueError("r must lie in (0, 1)")
    if f.is_constant():
        return _out(np.full(r.shape, abs(f.coeffs[0]) ** p))
    x = r * r
    h, _ = profile_h(series_profile(f, p), alpha, x, tol)
    return _out(h / np.asarray(phi(alpha, x)))


def means_point(f: PowerSeries, p: float, alpha: float, x: float, tol: float = H_TOL) -> MeansPoint:
    xa = np.asarray([x], dtype=np.float64)
    mp, flagged = _m_prime(f, p, xa)
    hq = h_of_x(f, p, alpha, x, tol)
    return MeansPoint(
        x=float(x),
        M=float(M_of_x(f, p, x)),
        Mp=float(mp[0]),
        h=hq.value,
        h_err=hq.error_estimate,
        phi=float(phi(alpha, x)),
        phi_prime=float(phi_prime(alpha, x)),
        derivative_fallback=bool(flagged[0]),
    )
