"""Log-convexity of area means through the D operator.

``D(g) = g'/g + x g''/g - x (g'/g)**2`` is nonnegative exactly when log g
is convex in log x.  For the area mean Q = h/phi the test quantity is
``Delta = D(h) - D(phi)``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .means import (
    H_TOL,
    X_MAX,
    X_MIN,
    MeanProfile,
    Params,
    area_mean,
    phi,
    phi_minus_x,
    profile_h,
    series_profile,
)
from .quad import richardson_derivative
from .series import PowerSeries

VERDICT_RTOL = 1e-8
CONFIRM_FACTOR = 10.0
TOL_SHRINK = 100.0
VERDICTS = ("convex", "violated", "inconclusive")


@dataclass(frozen=True)
class GridSpec:
    points: int = 512
    x_min: float = X_MIN
    x_max: float = X_MAX
    spacing: str = "log"

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("grid needs at least two points")
        if not 0 < self.x_min < self.x_max < 1:
            raise ValueError("require 0 < x_min < x_max < 1")
        if self.spacing not in ("log", "linear"):
            raise ValueError("spacing must be 'log' or 'linear'")

    def array(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.x_min, self.x_max, self.points)
        return np.linspace(self.x_min, self.x_max, self.points)


def refine_grid(x, focus=None, window: int = 8) -> np.ndarray:
    """Insert midpoints (geometric) between neighbours.

    Without ``focus`` every interval is split; otherwise only the ``window``
    intervals on either side of the grid point nearest ``focus``.  The result
    always contains the input grid.
    """
    x = np.unique(np.asarray(x, dtype=np.float64))
    mids = np.sqrt(x[:-1] * x[1:])
    if focus is not None:
        i = int(np.argmin(np.abs(x - focus)))
        lo, hi = max(0, i - window), min(mids.size, i + window)
        mids = mids[lo:hi]
    return np.union1d(x, mids)


# -- the operator ------------------------------------------------------------

def D_operator(g, g1, g2, x):
    """D(g) from g, g', g'' at x."""
    g = np.asarray(g, dtype=np.float64)
    if np.any(g <= 0):
        raise ValueError("D operator needs g > 0")
    q = np.asarray(g1) / g
    out = q + np.asarray(x) * np.asarray(g2) / g - np.asarray(x) * q * q
    return float(out) if np.ndim(out) == 0 else out


def D_phi(alpha, x):
    """(phi - x)/phi**2 * (1-x)**(alpha-1)."""
    ph = np.asarray(phi(alpha, x))
    out = np.asarray(phi_minus_x(alpha, x)) / ph ** 2 * (1 - np.asarray(x)) ** (alpha - 1)
    return float(out) if np.ndim(out) == 0 else out


@dataclass
class GridEvaluation:
    """All pointwise quantities of the Delta pipeline on one grid."""

    x: np.ndarray
    M: np.ndarray
    Mp: np.ndarray
    h: np.ndarray
    h_err: np.ndarray
    phi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D_h: np.ndarray
    D_phi: np.ndarray
    delta: np.ndarray
    quadratic: np.ndarray
    tolerance: np.ndarray

    @property
    def margin(self) -> np.ndarray:
        return self.delta / self.tolerance

    def rows(self):
        cols = (self.x, self.M, self.h, self.phi, self.D_h, self.D_phi, self.delta)
        return list(zip(*(c.tolist() for c in cols)))


def evaluate_profile(profile: MeanProfile, alpha: float, x, tol: float = H_TOL) -> GridEvaluation:
    x = np.asarray(x, dtype=np.float64)
    M = np.asarray(profile.value(x), dtype=np.float64) * np.ones_like(x)
    Mp = np.asarray(profile.derivative(x), dtype=np.float64) * np.ones_like(x)
    if np.any(M <= 0):
        raise ValueError("mean profile must be positive on the grid")
    h, h_err = profile_h(profile, alpha, x, tol)
    u = 1.0 - x
    ph = np.asarray(phi(alpha, x))
    m = np.asarray(phi_minus_x(alpha, x))
    A = m / ph ** 2
    C = x * u ** (alpha + 1)
    y = x * u * Mp / M
    B = (1 - x - alpha * x) + y
    Q = M.copy() if profile.constant else h / ph
    # hB - CM rewritten through phi*(1-x-alpha x) = (phi - x) + C
    hb_cm = Q * m + (Q - M) * C + Q * ph * y
    scale = u ** (alpha - 1)
    Dh = scale * M * hb_cm / h ** 2
    Dphi = scale * A
    # M(hB - CM) - A h**2, same sign as Delta
    quad = (M - Q) * (Q * m - M * C) + M * Q * ph * y
    delta = scale * quad / (Q * ph) ** 2
    tolerance = VERDICT_RTOL * (1 + np.abs(Dh) + np.abs(Dphi))
    return GridEvaluation(x, M, Mp, h, h_err, ph, A, B, C, Dh, Dphi, delta, quad, tolerance)


def _point(f, p, alpha, x, tol=H_TOL):
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    return evaluate_profile(series_profile(f, p), alpha, x, tol)


def _scalar(v):
    return float(v[0]) if v.size == 1 else v


def D_h(f: PowerSeries, p: float, alpha: float, x, tol: float = H_TOL):
    return _scalar(_point(f, p, alpha, x, tol).D_h)


def delta(f: PowerSeries, p: float, alpha: float, x, tol: float = H_TOL):
    """Delta(x) = D(h) - D(phi)."""
    return _scalar(_point(f, p, alpha, x, tol).delta)


def delta_quadratic(f: PowerSeries, p: float, alpha: float, x, tol: float = H_TOL):
    """-A h**2 + M B h - C M**2, which has the sign of Delta."""
    return _scalar(_point(f, p, alpha, x, tol).quadratic)


# -- reports -----------------------------------------------------------------

@dataclass
class ConvexityReport:
    params: Params
    function_id: str
    grid: np.ndarray
    delta_values: np.ndarray
    min_delta: float
    argmin_x: float
    verdict: str
    tolerance_used: float
    worst_margin: float = 0.0
    worst_x: float = math.nan
    refinement_rounds: int = 0
    diagnostic: str = ""
    evaluation: GridEvaluation | None = field(default=None, repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "params": {"p": self.params.p, "alpha": self.params.alpha},
            "function": self.function_id,
            "grid": self.grid.tolist(),
            "delta": self.delta_values.tolist(),
            "min_delta": self.min_delta,
            "argmin_x": self.argmin_x,
            "verdict": self.verdict,
            "tolerance": self.tolerance_used,
            "worst_margin": self.worst_margin,
            "worst_x": self.worst_x,
            "refinement_rounds": self.refinement_rounds,
            "diagnostic": self.diagnostic,
        }

    def to_json(self) -> str:
        d = self.to_dict()
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
        d["delta"] = [v if math.isfinite(v) else None for v in d["delta"]]
        return json.dumps(d, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        write_csv(buf, ["x", "M", "h", "phi", "D_h", "D_phi", "delta"], self.evaluation.rows())
        return buf.getvalue()


def write_csv(stream, header, rows):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) if isinstance(v, float) else v for v in row])


def format_float(v: float) -> str:
    return f"{v:.16e}"


def _summarise(ev: GridEvaluation):
    i = int(np.argmin(ev.delta))
    margin = ev.margin
    j = int(np.argmin(margin))
    return float(ev.delta[i]), float(ev.x[i]), float(margin[j]), float(ev.x[j]), float(ev.tolerance[j])


def _classify(margin: float, confirmed: bool) -> str:
    if margin >= -1.0:
        return "convex"
    if confirmed and margin < -CONFIRM_FACTOR:
        return "violated"
    return "inconclusive"


def _profile_report(profile, params, label, grid, tol, rounds, localized=False, diagnostic=""):
    ev = evaluate_profile(profile, params.alpha, grid, tol)
    min_d, arg_x, margin, worst_x, tol_used = _summarise(ev)
    done = 0
    if margin < -1.0:
        while done < rounds:
            grid = refine_grid(grid, worst_x if localized else None)
            tol /= TOL_SHRINK
            ev = evaluate_profile(profile, params.alpha, grid, tol)
            min_d, arg_x, margin, worst_x, tol_used = _summarise(ev)
            done += 1
            if margin >= -1.0:
                break
    verdict = _classify(margin, done >= max(rounds, 1))
    return ConvexityReport(
        params=params,
        function_id=label,
        grid=ev.x,
        delta_values=ev.delta,
        min_delta=min_d,
        argmin_x=arg_x,
        verdict=verdict,
        tolerance_used=tol_used,
        worst_margin=margin,
        worst_x=worst_x,
        refinement_rounds=done,
        diagnostic=diagnostic,
        evaluation=ev,
    )


def convexity_report(f: PowerSeries, p: float, alpha: float, grid_spec: GridSpec = GridSpec(),
                     tol: float = H_TOL, refine_rounds: int = 1) -> ConvexityReport:
    """Delta on the grid plus a verdict.

    A point fails when Delta < -tolerance, with tolerance
    1e-8 * (1 + |D(h)| + |D(phi)|).  A failing grid is re-evaluated on a
    doubled grid with 100x tighter quadrature; it is reported ``violated``
    only if the worst point stays below -10 * tolerance.
    """
    if grid_spec.points < 16:
        raise ValueError("convexity grids need at least 16 points")
    params = Params(p, alpha)
    return _profile_report(series_profile(f, p), params, f.label(), grid_spec.array(), tol, refine_rounds)


def three_point_check(f: PowerSeries, p: float, alpha: float, r1: float, r2: float, theta: float,
                      tol: float = H_TOL) -> float:
    """log of the geometric interpolation bound minus log of the mean at r1**theta * r2**(1-theta)."""
    if not 0 < r1 < r2 < 1:
        raise ValueError("require 0 < r1 < r2 < 1")
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    r = r1 ** theta * r2 ** (1 - theta)
    q1, q2, q = np.log(np.asarray(area_mean(f, p, alpha, np.array([r1, r2, r]), tol)))
    return float(theta * q1 + (1 - theta) * q2 - q)


def _profile_second(profile: MeanProfile, x):
    if profile.second is not None:
        return np.asarray(profile.second(x), dtype=np.float64)
    step = 0.125 * np.minimum(np.minimum(x, 1 - x), 0.08)
    return np.asarray(richardson_derivative(profile.derivative, x, step))


def profile_convexity_check(profile: MeanProfile, alpha: float, grid_spec: GridSpec = GridSpec(),
                            tol: float = H_TOL, refine_rounds: int = 1) -> ConvexityReport:
    """The Delta verdict for an arbitrary nondecreasing, log-convex M.

    M itself is scanned first; if it decreases or D(M) < 0 somewhere on the
    grid the report is ``inconclusive`` and says where.
    """
    x = grid_spec.array()
    params = Params(1.0, alpha)
    M = np.asarray(profile.value(x), dtype=np.float64) * np.ones_like(x)
    Mp = np.asarray(profile.derivative(x), dtype=np.float64) * np.ones_like(x)
    M2 = _profile_second(profile, x) * np.ones_like(x)
    problems = []
    if np.any(M <= 0):
        problems.append(f"M not positive at x={float(x[np.argmax(M <= 0)])!r}")
    else:
        dm = D_operator(M, Mp, M2, x)
        mono_tol = VERDICT_RTOL * (1 + np.abs(Mp))
        conv_tol = VERDICT_RTOL * (1 + np.abs(Mp / M) + np.abs(x * M2 / M))
        if np.any(Mp < -mono_tol):
            problems.append(f"M decreasing at x={float(x[np.argmax(Mp < -mono_tol)])!r}")
        if np.any(dm < -conv_tol):
            problems.append(f"log M not convex in log x at x={float(x[np.argmax(dm < -conv_tol)])!r}")
    if problems:
        return ConvexityReport(params, profile.label, x, np.full(x.shape, math.nan), math.nan,
                               math.nan, "inconclusive", math.nan, math.nan, math.nan, 0,
                               "; ".join(problems))
    return _profile_report(profile, params, profile.label, x, tol, refine_rounds)
