"""Parameter sweeps over (p, alpha, f) with a refinement step for candidate violations."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .convexity import ConvexityReport, GridSpec, _profile_report, format_float
from .means import H_TOL, Params, series_profile
from .quad import QuadratureError
from .series import PowerSeries, format_coeff, parse_coeffs

THEOREM_P = (0.5, 1.0, 2.0, 3.5)
THEOREM_ALPHA = (-2.0, -1.5, -1.0, -0.5, 0.0)
SCAN_P = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0)
SCAN_ALPHA = (-4.0, -3.5, -3.0, -2.5, -2.1, -2.0, -1.5, -1.0, -0.5, 0.0, 0.25, 0.5, 1.0)
MIN_WITNESS_ROUNDS = 2


@dataclass(frozen=True)
class CorpusSpec:
    seed: int = 42
    monomial_degrees: tuple = (0, 1, 2, 3, 5)
    random_count: int = 3
    random_degree: int = 8
    coefficient_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "monomial_degrees", tuple(int(k) for k in self.monomial_degrees))
        if self.random_count < 0 or self.random_degree < 0 or any(k < 0 for k in self.monomial_degrees):
            raise ValueError("counts and degrees must be nonnegative")
        if not self.coefficient_scale > 0:
            raise ValueError("coefficient_scale must be positive")


def corpus_generate(spec: CorpusSpec = CorpusSpec()) -> list:
    """Monomials, then 1 + z, then random polynomials with coefficients uniform in a disk."""
    out = [PowerSeries.monomial(k) for k in spec.monomial_degrees]
    out.append(PowerSeries((1.0, 1.0)))
    rng = np.random.default_rng(spec.seed)
    n = spec.random_degree + 1
    for _ in range(spec.random_count):
        rad = spec.coefficient_scale * np.sqrt(rng.uniform(size=n))
        theta = 2.0 * np.pi * rng.uniform(size=n)
        out.append(PowerSeries(tuple(rad * np.exp(1j * theta))))
    return out


@dataclass(frozen=True)
class SweepRecord:
    p: float
    alpha: float
    function_id: str
    coeffs: tuple
    verdict: str
    min_delta: float
    argmin_x: float
    refinement_rounds: int
    worst_margin: float = math.nan
    worst_x: float = math.nan
    tolerance_used: float = math.nan
    error: str = ""

    @property
    def params(self) -> Params:
        return Params(self.p, self.alpha)

    @property
    def series(self) -> PowerSeries:
        return PowerSeries(parse_coeffs(",".join(self.coeffs)))

    @property
    def in_theorem_range(self) -> bool:
        return -2.0 <= self.alpha <= 0.0

    @classmethod
    def from_report(cls, f: PowerSeries, report: ConvexityReport) -> "SweepRecord":
        return cls(
            p=report.params.p,
            alpha=report.params.alpha,
            function_id=report.function_id,
            coeffs=_coeff_text(f),
            verdict=report.verdict,
            min_delta=report.min_delta,
            argmin_x=report.argmin_x,
            refinement_rounds=report.refinement_rounds,
            worst_margin=report.worst_margin,
            worst_x=report.worst_x,
            tolerance_used=report.tolerance_used,
        )

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coeffs"] = list(self.coeffs)
        for k, v in d.items():
            if isinstance(v, float) and not math.isfinite(v):
                d[k] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), allow_nan=False)


def _coeff_text(f: PowerSeries) -> tuple:
    return tuple(format_coeff(c) for c in f.coeffs)


@dataclass(frozen=True)
class _Cell:
    f: PowerSeries
    p: float
    alpha: float
    grid: GridSpec
    tol: float
    rounds: int


def _run_cell(cell: _Cell) -> SweepRecord:
    try:
        rep = _profile_report(series_profile(cell.f, cell.p), Params(cell.p, cell.alpha),
                              cell.f.label(), cell.grid.array(), cell.tol, 0)
        rec = SweepRecord.from_report(cell.f, rep)
        if rec.verdict != "convex":
            rec = refine_witness(rec, cell.rounds, cell.grid, cell.tol)
        return rec
    except (ArithmeticError, ValueError, QuadratureError) as exc:
        return SweepRecord(cell.p, cell.alpha, cell.f.label(), _coeff_text(cell.f),
                           "inconclusive", math.nan, math.nan, 0, error=f"{type(exc).__name__}: {exc}")


def refine_witness(record: SweepRecord, rounds: int = MIN_WITNESS_ROUNDS,
                   grid_spec: GridSpec = GridSpec(), tol: float = H_TOL) -> SweepRecord:
    """Re-run a candidate cell with localized grid doubling and 100x tighter quadrature per round.

    At least two rounds are used; the cell is ``violated`` only if the worst
    point stays below -10 tolerance throughout.
    """
    rounds = max(int(rounds), MIN_WITNESS_ROUNDS)
    f = record.series
    rep = _profile_report(series_profile(f, record.p), record.params, record.function_id,
                          grid_spec.array(), tol, rounds, localized=True)
    return SweepRecord.from_report(f, rep)


def sweep(p_list, alpha_list, corpus, grid_spec: GridSpec = GridSpec(), tol: float = H_TOL,
          jobs: int | None = None, rounds: int = MIN_WITNESS_ROUNDS) -> list:
    """One record per (p, alpha, f), ordered by p, then alpha, then corpus position."""
    p_list, alpha_list, corpus = list(p_list), list(alpha_list), list(corpus)
    if not p_list or not alpha_list or not corpus:
        raise ValueError("p_list, alpha_list and corpus must be nonempty")
    cells = [_Cell(f, float(p), float(a), grid_spec, tol, rounds)
             for p in p_list for a in alpha_list for f in corpus]
    jobs = (os.cpu_count() or 1) if jobs is None else max(int(jobs), 1)
    if jobs == 1 or len(cells) == 1:
        return [_run_cell(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_cell, cells, chunksize=1))


def theorem_range_violations(records) -> list:
    return [r for r in records if r.in_theorem_range and r.verdict == "violated"]


def write_jsonl(stream, records):
    for r in records:
        stream.write(r.to_json() + "\n")


CSV_COLUMNS = ("p", "alpha", "function_id", "verdict", "min_delta", "argmin_x",
               "worst_margin", "worst_x", "tolerance_used", "refinement_rounds", "error")


def records_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        row = []
        for c in CSV_COLUMNS:
            v = getattr(r, c)
            row.append(format_float(v) if isinstance(v, float) else v)
        w.writerow(row)
    return buf.getvalue()


def corpus_to_json(corpus) -> str:
    return json.dumps([[[c.real, c.imag] for c in f.coeffs] for f in corpus], indent=1)


def corpus_from_json(text: str) -> list:
    return [PowerSeries(tuple(complex(re, im) for re, im in f)) for f in json.loads(text)]
