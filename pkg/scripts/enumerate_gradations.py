#!/usr/bin/env python3
"""Count the valid gradations per family and type at small size and order."""

import argparse
from collections import Counter

from looptoda import gradation


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=6)
    ap.add_argument("--max-M", type=int, default=6)
    args = ap.parse_args()

    for family in ("gl", "so", "sp"):
        counts = Counter()
        for n in range(1, args.max_n + 1):
            if family == "sp" and n % 2:
                continue
            for M in range(1, args.max_M + 1):
                for spec in gradation.enumerate_specs(family, n, M):
                    key = "trivial" if isinstance(spec, gradation.TrivialSpec) else spec.gradation_type
                    counts[key] += 1
        print(family, dict(sorted(counts.items())))


if __name__ == "__main__":
    main()
