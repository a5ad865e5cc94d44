#!/usr/bin/env python3
"""Map the bistable basins of the three-site selection-mutation flow.

Sweeps mu for b = 1/5 and integrates from a grid of symmetric starts,
recording the terminal center mass next to the cubic's exact roots.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from pairpop.selmut import cubic_reduce_1d, integrate, symmetric_start, symmetric_three_site_params


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b", type=float, default=0.2)
    ap.add_argument("--mus", type=float, nargs="+", default=[1 / 150, 1 / 100, 1 / 80, 1 / 70])
    ap.add_argument("--starts", type=int, default=13)
    ap.add_argument("--T", type=float, default=2000.0)
    ap.add_argument("--out", default="out/bistability_basins.csv")
    args = ap.parse_args()

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["b", "mu", "pi0_start", "pi0_final", "nearest_root"])
        for mu in args.mus:
            p = symmetric_three_site_params(args.b, mu)
            roots = cubic_reduce_1d(args.b, mu).roots
            for x0 in np.linspace(0.02, 0.98, args.starts):
                traj = integrate(symmetric_start(float(x0)), p, T=args.T, method="rk45")
                final = traj.final[0]
                nearest = min(roots, key=lambda r: abs(r - final)) if roots else float("nan")
                w.writerow([args.b, mu, f"{x0:.4f}", f"{final:.8f}", f"{nearest:.8f}"])
                print(f"mu={mu:.5f} start={x0:.3f} -> {final:.6f} (root {nearest:.6f})")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
