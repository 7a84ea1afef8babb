"""Randomized check of the factorization identity and of the expanded E, F forms."""
import argparse
import json
import sys

from areamean.cli import identity_summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    s = identity_summary(args.samples, args.seed)
    print(json.dumps(s, indent=1))
    return 0 if s["passed"] else 3


if __name__ == "__main__":
    sys.exit(main())
