#!/usr/bin/env python3
"""Plot token count against merge step from a `flowtok train-vocab --log` CSV."""

import argparse
import csv
from collections import defaultdict


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("log", help="merge log CSV")
    ap.add_argument("-o", "--out", default="token_counts.png", help="image path")
    args = ap.parse_args()

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    steps = defaultdict(list)
    counts = defaultdict(list)
    with open(args.log, newline="") as f:
        for row in csv.DictReader(f):
            steps[row["group"]].append(int(row["step"]))
            counts[row["group"]].append(int(row["token_count"]))

    fig, ax = plt.subplots(figsize=(7, 4))
    for group in steps:
        ax.plot(steps[group], counts[group], label=group)
    ax.set_xlabel("merge step")
    ax.set_ylabel("token count")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=120)
    print(args.out)


if __name__ == "__main__":
    main()
