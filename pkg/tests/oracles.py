"""Reference values computed independently of the package.

Circle means come from mpmath adaptive quadrature with breakpoints at the
angles of nearby zeros, h from mpmath quadrature of Parseval polynomials, and
D values from sympy differentiation of closed forms.
"""
from __future__ import annotations

import math
from functools import lru_cache

import mpmath as mp
import sympy as sp

mp.mp.dps = 30


def parseval(coeffs, x):
    """Sum |a_k|**2 x**k, the circle mean of |f|**2 at radius sqrt(x)."""
    return sum(abs(complex(a)) ** 2 * x ** k for k, a in enumerate(coeffs))


def circle_mean_mp(coeffs, p, r):
    """(1/2pi) * integral of |f(r e^{it})|**p, split at the arguments of zeros of f."""
    cs = [mp.mpc(complex(a)) for a in coeffs]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    pts = [mp.mpf(0)]
    if len(cs) > 1:
        for z in mp.polyroots(cs[::-1], maxsteps=200, extraprec=60):
            if z != 0:
                pts.append(mp.arg(z) % (2 * mp.pi))
    pts = sorted(set(pts)) + [2 * mp.pi]

    def g(t):
        z = r * mp.expj(t)
        return abs(mp.polyval(cs[::-1], z)) ** p

    return float(mp.quad(g, pts) / (2 * mp.pi))


def h_p2_mp(coeffs, alpha, x):
    """h at p = 2: integral of sum |a_k|**2 t**k (1-t)**alpha over [0, x]."""
    w = [abs(complex(a)) ** 2 for a in coeffs]
    return float(mp.quad(lambda t: mp.polyval(w[::-1], t) * (1 - t) ** alpha, [0, x]))


def phi_mp(alpha, x):
    return float(mp.quad(lambda t: (1 - t) ** alpha, [0, x]))


_x = sp.symbols("x", positive=True)


def _D(g):
    g1 = sp.diff(g, _x)
    return g1 / g + _x * sp.diff(g, _x, 2) / g - _x * (g1 / g) ** 2


@lru_cache(maxsize=None)
def d_of_closed_form(expr_text: str, x: float) -> float:
    """D(g)(x) for g given as a sympy expression in x."""
    g = sp.sympify(expr_text, locals={"x": _x})
    return float(_D(g).subs(_x, sp.Rational(repr(x))).evalf(30))


def log_log_second(expr_text: str, x: float) -> float:
    """d**2 log g / d(log x)**2, by sympy; equals x * D(g)."""
    g = sp.sympify(expr_text, locals={"x": _x})
    t = sp.symbols("t")
    expr = sp.log(g.subs(_x, sp.exp(t)))
    return float(sp.diff(expr, t, 2).subs(t, sp.log(sp.Rational(repr(x)))).evalf(30))


def phi_minus_x_mp(alpha, x):
    """phi(x) - x from the closed form with enough digits to absorb the cancellation."""
    extra = int(-math.log10(abs(alpha))) if 0 < abs(alpha) < 1 else 0
    with mp.workdps(60 + extra):
        a, x = mp.mpf(alpha), mp.mpf(x)
        if a == -1:
            return float(-mp.log1p(-x) - x)
        return float((1 - (1 - x) ** (a + 1)) / (a + 1) - x)


@lru_cache(maxsize=None)
def _aux_exprs(log_weight=False):
    a, y = sp.symbols("a y", real=True)
    phi = -sp.log(1 - _x) if log_weight else (1 - (1 - _x) ** (a + 1)) / (a + 1)
    A = (phi - _x) / phi ** 2
    B = (1 - _x - a * _x) + y
    C = _x * (1 - _x) ** (a + 1)
    logder = y / (_x * (1 - _x))
    B0 = -(a + 1) - _x * logder
    A1 = _x * (1 - _x) * sp.diff(A, _x)
    B1 = _x * (1 - _x) * (logder * B + B0)
    C1 = _x * (1 - _x) * (2 * C * logder + sp.diff(C, _x))
    E = 2 * A ** 2 * C - A * B1 + A1 * B
    F = A * B * B1 - A1 * B ** 2 + 2 * A * A1 * C - 2 * A ** 2 * C1
    S2 = B ** 2 - 4 * A * C
    return [sp.lambdify((_x, y, a), e, "mpmath") for e in (E, F, S2)], (a, y)


def aux_mp(x, y, alpha):
    """E, F and S**2 from their definitions, differentiated by sympy, at 40 digits."""
    (E, F, S2), _ = _aux_exprs(alpha == -1)
    with mp.workdps(40):
        args = (mp.mpf(x), mp.mpf(y), mp.mpf(alpha))
        return float(E(*args)), float(F(*args)), float(S2(*args))
