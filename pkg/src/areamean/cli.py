"""Command-line front end: means, convexity, lemmas, identity, sweep.

Exit codes: 0 success, 2 bad input, 3 numerical failure, 4 a violation
inside the range alpha in [-2, 0].
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import aux
from .convexity import GridSpec, convexity_report, write_csv
from .means import H_TOL, X_MAX, X_MIN, M_of_x, area_mean, circle_mean, profile_h, series_profile
from .quad import QuadratureError
from .series import CoeffParseError, PowerSeries
from .sweep import (
    SCAN_ALPHA,
    SCAN_P,
    CorpusSpec,
    corpus_generate,
    records_csv,
    sweep,
    theorem_range_violations,
    write_jsonl,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_VIOLATION = 0, 2, 3, 4
COMMANDS = ("means", "convexity", "lemmas", "identity", "sweep")
MEANS_POINTS = 9
LEMMA_TOL = 1e-9
D_TOL = 1e-8
G_TOL = 1e-12
IDENTITY_TOL = 1e-8
DUAL_PATH_TOL = 1e-10


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class CliConfig:
    command: str
    coeffs: str = "0,1"
    p: float = 2.0
    alpha: float = 0.0
    grid_points: int | None = None
    x_min: float = X_MIN
    x_max: float = X_MAX
    tol: float = H_TOL
    format: str | None = None
    seed: int = 42
    jobs: int | None = None
    output_path: str | None = None
    samples: int = 10_000
    x_values: tuple = ()
    p_list: tuple = SCAN_P
    alpha_list: tuple = SCAN_ALPHA
    monomials: tuple = (0, 1, 2, 3, 5)
    random_count: int = 3
    random_degree: int = 8

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if not 0 < self.x_min < self.x_max < 1:
            raise InputError("require 0 < x_min < x_max < 1")
        if self.format is None:
            object.__setattr__(self, "format", "json" if self.command == "sweep" else "csv")
        if self.format not in ("csv", "json"):
            raise InputError("format must be csv or json")
        if not self.tol > 0:
            raise InputError("tol must be positive")

    def series(self) -> PowerSeries:
        return PowerSeries.parse(self.coeffs)

    def grid(self, default: int = 512) -> GridSpec:
        return GridSpec(self.grid_points or default, self.x_min, self.x_max)


# -- commands ----------------------------------------------------------------

def cmd_means(cfg: CliConfig):
    """Rows (r, x, circle mean, area mean) at r_j = j/(n+1) or at the given x values."""
    f = cfg.series()
    if cfg.x_values:
        x = np.array(cfg.x_values, dtype=np.float64)
        if np.any((x <= 0) | (x >= 1)):
            raise InputError("x values must lie in (0, 1)")
        r = np.sqrt(x)
    else:
        n = cfg.grid_points or MEANS_POINTS
        r = np.arange(1, n + 1) / (n + 1)
        x = r * r
    mp = np.atleast_1d(circle_mean(f, cfg.p, r))
    ma = np.atleast_1d(area_mean(f, cfg.p, cfg.alpha, r, cfg.tol))
    header = ["r", "x", "M_p", "M_p_alpha"]
    rows = [[float(a), float(b), float(c), float(d)] for a, b, c, d in zip(r, x, mp, ma)]
    return header, rows, {}, EXIT_OK


def cmd_convexity(cfg: CliConfig):
    f = cfg.series()
    rep = convexity_report(f, cfg.p, cfg.alpha, cfg.grid(), cfg.tol)
    ev = rep.evaluation
    header = ["x", "M", "h", "phi", "D_h", "D_phi", "delta"]
    summary = {k: v for k, v in rep.to_dict().items() if k not in ("grid", "delta")}
    code = EXIT_VIOLATION if rep.verdict == "violated" and rep.params.is_theorem_range else EXIT_OK
    return header, [list(map(float, row)) for row in ev.rows()], summary, code


LEMMA_COLUMNS = ["x", "g1", "g2", "g3", "y", "disc", "disc_expanded", "lower_slack", "upper_slack",
                 "delta", "d", "E_at_0", "E_at_y0", "F_at_y0"]


def _lemma_rows(f, p, alpha, x, tol):
    nan = np.full(x.shape, math.nan)
    g1, g2, g3 = (np.atleast_1d(g) for g in aux.g_functions(alpha, x))
    y = np.atleast_1d(aux.y_of(f, p, x))
    A, B, C = (np.atleast_1d(v) for v in aux.abc(f, p, alpha, x, keep_precision=True))
    disc = np.atleast_1d(aux.discriminant(A, B, C))
    disc_x = np.atleast_1d(aux.discriminant_expanded(x, y, alpha))
    lower = upper = delta = nan
    if alpha < 0:
        lower, upper = aux.sandwich_check(f, p, alpha, x, tol)
        delta = aux.delta_lower_proxy(f, p, alpha, x, tol)
    d = np.atleast_1d(aux.d_abstract(x, y, alpha))
    e0, ey0, fy0 = nan.copy(), nan.copy(), nan.copy()
    if alpha != 0:
        for i, xi in enumerate(x):
            try:
                s = aux.case_analysis_signs(float(xi), alpha, strict=False)
            except aux.DegenerateError:
                continue
            e0[i], ey0[i], fy0[i] = s.E_at_0, s.E_at_y0, s.F_at_y0
    cols = [x, g1, g2, g3, y, disc, disc_x, lower, upper, delta, d, e0, ey0, fy0]
    return [list(map(float, row)) for row in zip(*(np.broadcast_to(c, x.shape) for c in cols))]


def cmd_lemmas(cfg: CliConfig):
    """Auxiliary inequality quantities on the grid plus a summary of minima and failed checks."""
    f = cfg.series()
    x = cfg.grid().array()
    rows = _lemma_rows(f, cfg.p, cfg.alpha, x, cfg.tol)
    table = {c: np.array([r[i] for r in rows]) for i, c in enumerate(LEMMA_COLUMNS)}
    minima = {c: _nanmin(v) for c, v in table.items() if c not in ("x", "y")}
    h, _ = profile_h(series_profile(f, cfg.p), cfg.alpha, x, cfg.tol)
    scale_delta = 1.0 + np.abs(h)
    failures = []
    if -2 <= cfg.alpha <= 0:
        for g in ("g1", "g2", "g3"):
            if _below(minima[g], -G_TOL):
                failures.append(g)
        if np.any((table["y"] > 0) & ~(table["disc"] > 0)):
            failures.append("disc")
        if cfg.alpha < 0:
            ratio_scale = 1.0 + np.abs(h / np.asarray(M_of_x(f, cfg.p, x)))
            if np.any(table["lower_slack"] < -LEMMA_TOL * ratio_scale):
                failures.append("lower_slack")
            if np.any(table["upper_slack"] < -LEMMA_TOL * ratio_scale):
                failures.append("upper_slack")
            if np.any(table["delta"] < -LEMMA_TOL * scale_delta):
                failures.append("delta")
        if np.any(table["d"] < -D_TOL * (1.0 + np.abs(table["d"]))):
            failures.append("d")
        if -2 < cfg.alpha < 0:
            for c in ("E_at_0", "E_at_y0"):
                if _below(minima[c], -LEMMA_TOL):
                    failures.append(c)
            if not _below(0.0, minima["F_at_y0"]):
                failures.append("F_at_y0")
    negative_e0 = table["x"][table["E_at_0"] < 0]
    summary = {
        "alpha": cfg.alpha,
        "p": cfg.p,
        "minima": minima,
        "failed": failures,
        "E_at_0_first_negative_x": float(negative_e0[0]) if negative_e0.size else None,
    }
    code = EXIT_VIOLATION if failures else EXIT_OK
    return LEMMA_COLUMNS, rows, summary, code


def _below(v, bound):
    return v is not None and v < bound


def _nanmin(v):
    v = v[np.isfinite(v)]
    return float(v.min()) if v.size else None


def identity_samples(n: int, seed: int):
    """Random (x, y, alpha) with x in [0.05, 0.95], y in [0, 5], alpha in [-1.9, -0.1]."""
    rx, ry, ra = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(3))
    return rx.uniform(0.05, 0.95, n), ry.uniform(0.0, 5.0, n), ra.uniform(-1.9, -0.1, n)


def identity_summary(n: int, seed: int) -> dict:
    """Worst factorization residual and worst E/F dual-path gaps over n samples."""
    if n == 0:
        return {"samples": 0, "seed": seed, "max_residual": None, "max_E_gap": None,
                "max_F_gap": None, "passed": True}
    x, y, a = identity_samples(n, seed)
    res = np.empty(n)
    e_gap = np.empty(n)
    f_gap = np.empty(n)
    for i in range(n):
        res[i] = aux.factorization_residual(x[i], y[i], a[i])
        d = aux.aux_arrays(x[i], y[i], a[i])
        e_gap[i] = _rel(d["E"], d["E_expanded"])
        f_gap[i] = _rel(d["F"], d["F_expanded"])
    out = {
        "samples": n,
        "seed": seed,
        "max_residual": float(np.max(np.abs(res))),
        "max_E_gap": float(e_gap.max()),
        "max_F_gap": float(f_gap.max()),
    }
    out["passed"] = (out["max_residual"] <= IDENTITY_TOL and out["max_E_gap"] <= DUAL_PATH_TOL
                     and out["max_F_gap"] <= DUAL_PATH_TOL)
    return out


def _rel(a, b):
    a, b = np.longdouble(a), np.longdouble(b)
    return float(abs(a - b) / max(abs(a), abs(b), np.longdouble(aux.RESIDUAL_FLOOR)))


def cmd_identity(cfg: CliConfig):
    if cfg.samples < 0:
        raise InputError("samples must be nonnegative")
    if cfg.samples == 0:
        print("warning: zero samples requested; nothing to check", file=sys.stderr)
    s = identity_summary(cfg.samples, cfg.seed)
    header = list(s)
    return header, [list(s.values())], s, EXIT_OK if s["passed"] else EXIT_NUMERIC


def cmd_sweep(cfg: CliConfig):
    corpus = corpus_generate(CorpusSpec(cfg.seed, cfg.monomials, cfg.random_count, cfg.random_degree))
    records = sweep(cfg.p_list, cfg.alpha_list, corpus, cfg.grid(), cfg.tol, cfg.jobs)
    code = EXIT_VIOLATION if theorem_range_violations(records) else EXIT_OK
    return records, code


# -- argument handling ---------------------------------------------------------

def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("--coeffs", help='coefficients "a0, a1+bi, ..." (default "0,1")')
    common.add_argument("--p", type=float)
    common.add_argument("--alpha", type=float)
    common.add_argument("--grid-points", type=int)
    common.add_argument("--x-min", type=float)
    common.add_argument("--x-max", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    common.add_argument("--output", dest="output_path")

    parser = argparse.ArgumentParser(prog="areamean", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    m = sub.add_parser("means", parents=[common], help="circle and area means on a radius grid")
    m.add_argument("--x", dest="x_values", type=_float_list, help="explicit x = r**2 values")
    sub.add_parser("convexity", parents=[common], help="Delta on a grid and a verdict")
    sub.add_parser("lemmas", parents=[common], help="auxiliary inequalities on a grid")
    i = sub.add_parser("identity", parents=[common], help="randomized factorization test")
    i.add_argument("--samples", type=int)
    s = sub.add_parser("sweep", parents=[common], help="verdicts over (p, alpha, f)")
    s.add_argument("--p-list", type=_float_list)
    s.add_argument("--alpha-list", type=_float_list)
    s.add_argument("--monomials", type=_int_list, help="monomial degrees in the corpus")
    s.add_argument("--random-count", type=int)
    s.add_argument("--random-degree", type=int)
    return parser


_CONVERTERS = {
    "p": float, "alpha": float, "grid_points": int, "x_min": float, "x_max": float, "tol": float,
    "seed": int, "jobs": int, "samples": int, "random_count": int, "random_degree": int,
    "x_values": _float_list, "p_list": _float_list, "alpha_list": _float_list,
    "monomials": _int_list, "coeffs": str, "format": str, "output_path": str,
}


def read_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            key = "output_path" if key == "output" else key
            if key not in _CONVERTERS:
                raise InputError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _CONVERTERS[key](value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return out


def config_from_args(ns: argparse.Namespace) -> CliConfig:
    values = read_config_file(ns.config) if ns.config else {}
    for k, v in vars(ns).items():
        if k != "config" and v is not None:
            values[k] = v
    return CliConfig(**values)


@contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    raise TypeError(type(v).__name__)


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(w) for w in v]
    return v


def render_table(header, rows, summary, fmt: str) -> str:
    if fmt == "json":
        body = {"columns": list(header), "rows": _clean(rows), "summary": _clean(summary)}
        return json.dumps(body, default=_json_default) + "\n"
    buf = io.StringIO()
    write_csv(buf, header, rows)
    return buf.getvalue()


def run(cfg: CliConfig) -> int:
    if cfg.command == "sweep":
        records, code = cmd_sweep(cfg)
        with _sink(cfg.output_path) as out:
            if cfg.format == "csv":
                out.write(records_csv(records))
            else:
                write_jsonl(out, records)
        return code
    handler = {"means": cmd_means, "convexity": cmd_convexity, "lemmas": cmd_lemmas,
               "identity": cmd_identity}[cfg.command]
    header, rows, summary, code = handler(cfg)
    with _sink(cfg.output_path) as out:
        out.write(render_table(header, rows, summary, cfg.format))
    if cfg.format == "csv" and summary:
        print(json.dumps(_clean(summary), default=_json_default), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except (CoeffParseError, InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QuadratureError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
