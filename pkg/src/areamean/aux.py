"""Auxiliary quantities behind the convexity argument for area integral means.

All functions of (x, y, alpha) treat y = x(1-x)M'/M as a free variable.
Internally they run in ``np.longdouble`` because the combinations E, F and
F**2 - E**2 S**2 cancel heavily; results are returned as float64.  Most
quantities have two routes: a definitional one built from A, B, C and their
derivatives, and an expanded polynomial in (x, y, phi).  Tests compare them.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .means import (
    H_TOL,
    M_of_x,
    M_prime,
    phi,
    phi_minus_x,
    profile_h,
    series_profile,
)
from .series import PowerSeries

LD = np.longdouble
RESIDUAL_FLOOR = 1e-300
SIGN_TOL = 1e-12


class DegenerateError(ArithmeticError):
    """y0 is undefined: phi = x (alpha = 0) or g3 = 0."""


def _ld(v):
    return np.asarray(v, dtype=LD)


def _out(v):
    v = np.asarray(v, dtype=np.float64)
    return float(v) if v.ndim == 0 else v


def _check_unit(x, closed_left=False):
    x = np.asarray(x, dtype=np.float64)
    bad = (x < 0) if closed_left else (x <= 0)
    if np.any(bad | (x >= 1)):
        raise ValueError("x must lie in " + ("[0, 1)" if closed_left else "(0, 1)"))


def _weights(alpha, x):
    """phi, phi - x and 1 - (alpha+1) phi, the last as (1-x)**(alpha+1)."""
    x = _ld(x)
    shape = x.shape
    xf = np.atleast_1d(x)
    ph = np.asarray(phi(alpha, xf)).reshape(shape)
    m = np.asarray(phi_minus_x(alpha, xf)).reshape(shape)
    w = np.exp(LD(alpha + 1) * np.log1p(-x))
    return ph, m, w


# -- g-functions and A, B, C --------------------------------------------------

def _g(alpha, x, ph):
    a = LD(alpha)
    g1 = x * (1 - x - a * x) - (1 - x) * ph
    g2 = (a + 2) * ph * ph - 2 * (1 + x + a * x) * ph + 2 * x
    g3 = ph * ph - (1 + x + a * x) * ph + x
    return g1, g2, g3


def g_functions(alpha: float, x):
    """(g1, g2, g3) at x; all three are nonnegative for alpha in [-2, 0]."""
    _check_unit(x, closed_left=True)
    x = _ld(x)
    if alpha == 0:
        z = np.zeros_like(x)
        return _out(z), _out(z), _out(z)
    ph, _, _ = _weights(alpha, x)
    return tuple(_out(g) for g in _g(alpha, x, ph))


def weight_identity_residual(alpha: float, x):
    """1 - (alpha+1) phi - (1-x) phi', which vanishes identically."""
    _check_unit(x, closed_left=True)
    x = _ld(x)
    ph, _, _ = _weights(alpha, x)
    dphi = np.exp(LD(alpha) * np.log1p(-x))
    return _out(1 - LD(alpha + 1) * ph - (1 - x) * dphi)


def y_of(f: PowerSeries, p: float, x):
    """y = x(1-x)M'/M for the circle mean of |f|**p."""
    x = np.asarray(x, dtype=np.float64)
    m = np.asarray(M_of_x(f, p, x))
    if np.any(m <= 0):
        raise ArithmeticError("circle mean is not positive")
    return x * (1 - x) * np.asarray(M_prime(f, p, x)) / m


def _abc_y(alpha, x, y):
    x = _ld(x)
    y = _ld(y)
    ph, m, w = _weights(alpha, x)
    A = m / (ph * ph)
    B = (1 - x - LD(alpha) * x) + y
    C = x * w
    return A, B, C


def abc(f: PowerSeries, p: float, alpha: float, x, keep_precision: bool = False):
    """(A, B, C) at x using the circle mean of |f|**p.

    With ``keep_precision`` the long double values are returned, which matters
    when B**2 - 4AC is formed near x = 1 where it cancels heavily.
    """
    _check_unit(x)
    A, B, C = _abc_y(alpha, x, y_of(f, p, x))
    if keep_precision:
        return A, B, C
    return _out(A), _out(B), _out(C)


def discriminant(A, B, C):
    """B**2 - 4AC."""
    A, B, C = _ld(A), _ld(B), _ld(C)
    return _out(B * B - 4 * A * C)


def discriminant_expanded(x, y, alpha: float, phi_value=None):
    """B**2 - 4AC as a square plus terms in y.

    ``phi_value`` overrides the weight integral, for free-variable use.
    """
    x, y = _ld(x), _ld(y)
    if phi_value is None:
        ph, m, _ = _weights(alpha, x)
    else:
        ph = _ld(phi_value)
        m = ph - x
    b = 1 - x - LD(alpha) * x
    sq = b - 2 * m / ph
    return _out(sq * sq + y * y + 2 * b * y)


def _s_squared(alpha, x, y, ph):
    a = LD(alpha)
    q = (1 + x + a * x) * ph - 2 * x
    return y * y + 2 * (1 - x - a * x) * y + q * q / (ph * ph)


# -- the sandwich and delta ----------------------------------------------------

def _h_and_M(f, p, alpha, x, tol):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    h, _ = profile_h(series_profile(f, float(p)), alpha, x, tol)
    return h, np.asarray(M_of_x(f, p, x)), x


def sandwich_check(f: PowerSeries, p: float, alpha: float, x, tol: float = H_TOL):
    """Slacks of (B - S)/(2A) <= h/M <= (B + S)/(2A); nonnegative means it holds.

    The lower slack uses 2C/(B + S) in place of (B - S)/(2A).
    """
    if alpha >= 0:
        raise ValueError("alpha must be negative (A vanishes at alpha = 0)")
    _check_unit(x)
    scalar = np.ndim(x) == 0
    h, M, xs = _h_and_M(f, p, alpha, x, tol)
    A, B, C = _abc_y(alpha, xs, y_of(f, p, xs))
    S = np.sqrt(np.maximum(B * B - 4 * A * C, 0))
    ratio = _ld(h) / _ld(M)
    lower = ratio - 2 * C / (B + S)
    upper = (B + S) / (2 * A) - ratio
    if scalar:
        return float(lower[0]), float(upper[0])
    return _out(lower), _out(upper)


def delta_lower_proxy(f: PowerSeries, p: float, alpha: float, x, tol: float = H_TOL):
    """delta = h - M (B - S)/(2A), evaluated as h - 2CM/(B + S)."""
    if alpha >= 0:
        raise ValueError("alpha must be negative (A vanishes at alpha = 0)")
    _check_unit(x)
    scalar = np.ndim(x) == 0
    h, M, xs = _h_and_M(f, p, alpha, x, tol)
    A, B, C = _abc_y(alpha, xs, y_of(f, p, xs))
    S = np.sqrt(np.maximum(B * B - 4 * A * C, 0))
    d = _ld(h) - 2 * C * _ld(M) / (B + S)
    return float(d[0]) if scalar else _out(d)


# -- the seven auxiliary functions ---------------------------------------------

@dataclass(frozen=True)
class AuxBundle:
    """Every auxiliary quantity at one (x, y, alpha).

    ``E`` and ``F`` come from the definitional combinations of A, B, C, A1,
    B1, C1; ``E_expanded`` and ``F_expanded`` from the polynomial forms in
    (x, y, phi).  ``y0`` is nan when ``degenerate``.
    """

    x: float
    alpha: float
    phi: float
    y: float
    A: float
    B: float
    C: float
    B0: float
    A1: float
    B1: float
    C1: float
    E: float
    F: float
    S: float
    y0: float
    disc: float
    E_expanded: float
    F_expanded: float
    degenerate: bool

    def to_dict(self):
        return asdict(self)


def _definitional(alpha, x, y):
    """A, B, C, B0, A1, B1, C1, E, F, S, disc from derivatives of A, B, C."""
    a = LD(alpha)
    ph, m, w = _weights(alpha, x)
    u = 1 - x
    dphi = np.exp(a * np.log1p(-x))
    A = m / (ph * ph)
    B = (1 - x - a * x) + y
    C = x * w
    logder = y / (x * u)  # M'/M
    B0 = -(a + 1) - y / u
    dA = np.expm1(a * np.log1p(-x)) / (ph * ph) - 2 * m * dphi / ph ** 3
    A1 = x * u * dA
    B1 = x * u * (logder * B + B0)
    dC = w - (a + 1) * x * dphi
    C1 = x * u * (2 * C * logder + dC)
    E = 2 * A * A * C - A * B1 + A1 * B
    F = A * B * B1 - A1 * B * B + 2 * A * A1 * C - 2 * A * A * C1
    disc = B * B - 4 * A * C
    S = np.sqrt(np.maximum(disc, 0))
    return dict(phi=ph, A=A, B=B, C=C, B0=B0, A1=A1, B1=B1, C1=C1, E=E, F=F, S=S, disc=disc)


def _expanded_EF(alpha, x, y, ph):
    """E and F from their polynomial forms; numerators first, then phi powers."""
    a = LD(alpha)
    m = ph - x
    k = 1 - (a + 1) * ph
    _, g2, _ = _g(alpha, x, ph)
    e0 = x * x * k * g2
    e1 = (3 * x + 2 * a * x - 1) * ph * ph - x * (1 + 3 * x + 3 * a * x) * ph + 2 * x * x
    E = (e0 + ph * e1 * y - ph * ph * m * y * y) / ph ** 4
    f0 = e0 * ((1 + x + a * x) * ph - 2 * x)
    f1 = ((1 - 2 * x + 5 * x * x - a * x + 8 * a * x * x + 3 * a * a * x * x) * ph ** 3
          - x * (1 + 6 * x + 5 * x * x + 5 * a * x + 10 * a * x * x + 5 * a * a * x * x) * ph * ph
          + 4 * x * x * (1 + 2 * x + 2 * a * x) * ph - 4 * x ** 3)
    f2 = (2 - 4 * x - 3 * a * x) * ph * ph + 4 * (a + 1) * x * x * ph - 2 * x * x
    F = (f0 + ph * f1 * y + ph * ph * f2 * y * y + ph ** 3 * m * y ** 3) / ph ** 5
    return E, F


def _y0(alpha, x, ph, m):
    g1, g2, g3 = _g(alpha, x, ph)
    den = m * g3
    degenerate = (alpha == 0) | (den == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        y0 = np.where(degenerate, LD("nan"), g1 * g2 / np.where(den == 0, 1, den))
    return y0, degenerate


def aux_seven(x, y, alpha: float) -> AuxBundle:
    """Fill an AuxBundle at scalar (x, y, alpha) with y free."""
    _check_unit(x)
    if y < 0:
        raise ValueError("y must be nonnegative")
    xl, yl = _ld(x), _ld(y)
    d = _definitional(alpha, xl, yl)
    Ex, Fx = _expanded_EF(alpha, xl, yl, d["phi"])
    y0, degenerate = _y0(alpha, xl, d["phi"], _ld(phi_minus_x(alpha, np.atleast_1d(xl)))[0])
    return AuxBundle(
        x=float(x), alpha=float(alpha), y=float(y), y0=float(y0),
        E_expanded=float(Ex), F_expanded=float(Fx), degenerate=bool(degenerate),
        **{k: float(v) for k, v in d.items()},
    )


def aux_arrays(x, y, alpha: float) -> dict:
    """Vectorised variant of ``aux_seven``; values stay in long double."""
    x, y = np.broadcast_arrays(_ld(x), _ld(y))
    _check_unit(x)
    d = _definitional(alpha, x, y)
    d["E_expanded"], d["F_expanded"] = _expanded_EF(alpha, x, y, d["phi"])
    d["y0"], d["degenerate"] = _y0(alpha, x, d["phi"], _ld(phi_minus_x(alpha, x)))
    return d


def y0_closed_form(x, alpha: float):
    """y0 = g1 g2 / ((phi - x) g3); raises DegenerateError when undefined."""
    _check_unit(x)
    x = _ld(x)
    ph, m, _ = _weights(alpha, x)
    y0, degenerate = _y0(alpha, x, ph, m)
    if np.any(degenerate):
        raise DegenerateError("y0 undefined where phi = x or g3 = 0")
    return _out(y0)


def y0_from_factorization(x, alpha: float):
    """y0 read off the definitional F**2 - E**2 S**2, which is y times a linear function of y."""
    _check_unit(x)
    x = _ld(x)

    def lhs(yv):
        d = _definitional(alpha, x, np.full_like(x, yv))
        return d["F"] ** 2 - d["E"] ** 2 * d["disc"]

    l1, l2 = lhs(1), lhs(2) / 2
    slope = l2 - l1
    return _out(-(l1 - slope) / slope)


def factorization_residual(x, y, alpha: float):
    """Relative gap between F**2 - E**2 S**2 and its factored form.

    The left side is built from the definitional E, F and S**2; the right
    side is 4y x**2 (phi-x)**3 (1-(alpha+1)phi) g3 (y - y0) / phi**8.
    """
    x, y = np.broadcast_arrays(_ld(x), _ld(y))
    _check_unit(x)
    if np.any(y < 0):
        raise ValueError("y must be nonnegative")
    d = _definitional(alpha, x, y)
    lhs = d["F"] ** 2 - d["E"] ** 2 * d["disc"]
    ph = d["phi"]
    m = _ld(phi_minus_x(alpha, np.atleast_1d(x))).reshape(x.shape)
    g1, g2, g3 = _g(alpha, x, ph)
    if alpha == 0 or np.any(m * g3 == 0):
        raise DegenerateError("y0 undefined where phi = x or g3 = 0")
    k = 1 - LD(alpha + 1) * ph
    # (phi-x)**3 g3 (y - y0) = (phi-x)**2 ((phi-x) g3 y - g1 g2)
    rhs = 4 * y * x * x * m * m * k * (m * g3 * y - g1 * g2) / ph ** 8
    # measured against the cancelling terms so y = 0 does not read as a total miss
    terms = np.maximum(d["F"] ** 2, np.abs(d["E"] ** 2 * d["disc"]))
    scale = np.maximum(np.maximum(terms, np.abs(rhs)), LD(RESIDUAL_FLOOR))
    return _out((lhs - rhs) / scale)


# -- d = ES + F and the case analysis ------------------------------------------

def d_abstract(x, y, alpha: float):
    """E S + F with y free."""
    x, y = np.broadcast_arrays(_ld(x), _ld(y))
    _check_unit(x)
    d = _definitional(alpha, x, y)
    return _out(d["E"] * d["S"] + d["F"])


def d_value(f: PowerSeries, p: float, alpha: float, x):
    """E S + F at the y realised by the circle mean of |f|**p."""
    _check_unit(x)
    return d_abstract(x, y_of(f, p, x), alpha)


@dataclass(frozen=True)
class CaseSigns:
    x: float
    alpha: float
    E_at_0: float
    E_at_y0: float
    F_at_y0: float
    asserted: bool

    @property
    def holds(self) -> bool:
        return self.E_at_0 >= -SIGN_TOL and self.E_at_y0 >= -SIGN_TOL and self.F_at_y0 > 0


class SignError(ArithmeticError):
    pass


def case_analysis_signs(x: float, alpha: float, strict: bool = True) -> CaseSigns:
    """E(0), E(y0) and F(y0) from their closed forms.

    For alpha in (-2, 0) the signs E(0) >= 0, E(y0) >= 0, F(y0) > 0 are
    checked and, with ``strict``, a violation raises SignError.  Outside that
    range the values are only recorded.
    """
    _check_unit(x)
    if alpha == 0:
        raise DegenerateError("y0 undefined at alpha = 0")
    xl = _ld(x)
    ph, m, _ = _weights(alpha, xl)
    _, g2, g3 = _g(alpha, xl, ph)
    if g3 == 0 or m == 0:
        raise DegenerateError("y0 undefined where phi = x or g3 = 0")
    k = 1 - LD(alpha + 1) * ph
    e0 = xl * xl * k * g2 / ph ** 4
    ey0 = k * m ** 4 * g2 / (ph ** 4 * g3 * g3)
    fy0 = k * m ** 3 * g2 / (ph ** 5 * g3 ** 3) * (xl * g3 * g3 - k * m ** 3)
    rec = CaseSigns(float(x), float(alpha), float(e0), float(ey0), float(fy0),
                    asserted=-2 < alpha < 0)
    if strict and rec.asserted and not rec.holds:
        raise SignError(f"sign claim fails at x={x!r}, alpha={alpha!r}: {rec}")
    return rec
