"""Scan alpha below -2 and above 0 and list the cells that end violated or inconclusive."""
import argparse
import sys

from areamean.convexity import GridSpec
from areamean.sweep import SCAN_ALPHA, SCAN_P, CorpusSpec, corpus_generate, records_csv, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid-points", type=int, default=256)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--output", default="boundary_scan.csv")
    args = ap.parse_args()
    recs = sweep(SCAN_P, SCAN_ALPHA, corpus_generate(CorpusSpec(seed=args.seed)), GridSpec(args.grid_points),
                 jobs=args.jobs)
    with open(args.output, "w") as fh:
        fh.write(records_csv(recs))
    for r in recs:
        if r.verdict != "convex":
            print(f"{r.verdict:12s} p={r.p:<4} alpha={r.alpha:<5} f={r.function_id[:40]:40s} "
                  f"min_delta={r.min_delta:.4g} at x={r.argmin_x:.6g}")
    return 4 if any(r.in_theorem_range and r.verdict == "violated" for r in recs) else 0


if __name__ == "__main__":
    sys.exit(main())
