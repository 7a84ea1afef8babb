"""Integral means and area integral means of analytic functions on the unit disk."""
from .convexity import ConvexityReport, GridSpec, convexity_report, profile_convexity_check, three_point_check
from .means import MeanProfile, Params, area_mean, circle_mean, h_of_x, phi
from .series import CoeffParseError, PowerSeries
from .sweep import CorpusSpec, SweepRecord, corpus_generate, refine_witness, sweep

__all__ = [
    "CoeffParseError",
    "ConvexityReport",
    "CorpusSpec",
    "GridSpec",
    "MeanProfile",
    "Params",
    "PowerSeries",
    "SweepRecord",
    "area_mean",
    "circle_mean",
    "convexity_report",
    "corpus_generate",
    "h_of_x",
    "phi",
    "profile_convexity_check",
    "refine_witness",
    "sweep",
    "three_point_check",
]
