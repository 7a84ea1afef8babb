"""Signs of E(0), E(y0), F(y0) on an (alpha, x) grid, as CSV for plotting."""
import argparse
import csv
import sys

import numpy as np

from areamean import aux


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha-min", type=float, default=-3.0)
    ap.add_argument("--alpha-max", type=float, default=0.0)
    ap.add_argument("--n-alpha", type=int, default=32)
    ap.add_argument("--n-x", type=int, default=128)
    ap.add_argument("--output", default="case_analysis.csv")
    args = ap.parse_args()
    alphas = np.linspace(args.alpha_min, args.alpha_max, args.n_alpha + 2)[1:-1]
    xs = np.linspace(0, 0.999, args.n_x + 1)[1:]
    failing = 0
    with open(args.output, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["alpha", "x", "E_at_0", "E_at_y0", "F_at_y0", "holds"])
        for a in alphas:
            for x in xs:
                try:
                    s = aux.case_analysis_signs(float(x), float(a), strict=False)
                except aux.DegenerateError:
                    continue
                w.writerow([repr(float(a)), repr(float(x)), repr(s.E_at_0), repr(s.E_at_y0), repr(s.F_at_y0),
                            int(s.holds)])
                failing += (not s.holds) and s.asserted
    print(f"wrote {args.output}; {failing} failing points inside (-2, 0)")
    return 4 if failing else 0


if __name__ == "__main__":
    sys.exit(main())
