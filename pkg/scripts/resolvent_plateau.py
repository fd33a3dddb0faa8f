"""Measured resolvent constant C(omega) approaching the threshold, per weight exponent."""

import argparse

import numpy as np

from cuspflow.cusp_model import RadialGrid, WeightSpec
from cuspflow.spectral import resolvent_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.5, 1.0])
    ap.add_argument("--offsets", type=float, nargs="+", default=[0.05, 0.1, 0.25, 0.5, 1, 2, 5, 10])
    ap.add_argument("--probes", type=int, default=20)
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    grid = RadialGrid(n=args.n)
    print("lambda,omega_minus_threshold,C")
    for lam in args.lambdas:
        W = WeightSpec(lam)
        tab = resolvent_bound(W.omega0 + np.array(args.offsets), args.probes, args.seed, grid, W)
        for off, c in zip(args.offsets, tab.bounds):
            print(f"{lam},{off},{c:.5g}")


if __name__ == "__main__":
    main()
