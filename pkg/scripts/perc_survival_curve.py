#!/usr/bin/env python3
"""Monte-Carlo survival curve of oriented site percolation over gamma.

Shared uniforms couple the grid across the gamma sweep, so the curve is
monotone by construction and smooth in the plot.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from pairpop.perc import survival_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--width", type=int, default=30)
    ap.add_argument("--levels", type=int, default=30)
    ap.add_argument("--trials", type=int, default=4000)
    ap.add_argument("--p", type=float, default=1.0)
    ap.add_argument("--gammas", type=float, nargs="+",
                    default=list(np.round(np.arange(0.05, 0.55, 0.05), 2)))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="out/perc_survival.csv")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    uniforms = rng.random((args.trials, args.levels + 1, 2 * args.width + 1))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["gamma", "estimate", "stderr"])
        for gamma in args.gammas:
            est, se = survival_mc(
                gamma, args.width, args.levels, args.trials, seed=args.seed,
                p=args.p, target="origin", uniforms=uniforms,
            )
            w.writerow([gamma, est, se])
            print(f"gamma={gamma:.2f}: P(0 wet at n={args.levels}) = {est:.4f} +- {se:.4f}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
