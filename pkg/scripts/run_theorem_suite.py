"""Delta over the theorem range for the default corpus; writes one JSON line per cell."""
import argparse
import sys
import time

from areamean.convexity import GridSpec
from areamean.sweep import THEOREM_ALPHA, THEOREM_P, corpus_generate, sweep, theorem_range_violations, write_jsonl


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid-points", type=int, default=512)
    ap.add_argument("--jobs", type=int, default=None)
    ap.add_argument("--output", default="theorem_suite.jsonl")
    args = ap.parse_args()
    start = time.perf_counter()
    recs = sweep(THEOREM_P, THEOREM_ALPHA, corpus_generate(), GridSpec(args.grid_points), jobs=args.jobs)
    with open(args.output, "w") as fh:
        write_jsonl(fh, recs)
    bad = theorem_range_violations(recs)
    counts = {v: sum(r.verdict == v for r in recs) for v in ("convex", "violated", "inconclusive")}
    print(f"{len(recs)} cells in {time.perf_counter() - start:.1f}s: {counts}")
    worst = min(recs, key=lambda r: r.worst_margin)
    print(f"worst margin {worst.worst_margin:.3g} for {worst.function_id} p={worst.p} alpha={worst.alpha}")
    return 4 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
