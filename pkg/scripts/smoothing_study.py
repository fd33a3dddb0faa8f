"""C^k smoothing slopes of rough data across seeds, jump counts and resolutions."""

import argparse

from cuspflow.cusp_model import RadialGrid
from cuspflow.flow import FlowConfig, Perturbation, run_flow, smoothing_exponent


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, nargs="+", default=list(range(6)))
    ap.add_argument("--jumps", type=int, nargs="+", default=[2, 4])
    ap.add_argument("--grids", type=int, nargs="+", default=[1201, 2401])
    ap.add_argument("--R", type=float, default=12.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--T", type=float, default=0.1)
    args = ap.parse_args()
    keys = ("c0", "c1", "c2", "d1", "d2")
    print("n,jumps,seed," + ",".join(f"slope_{k}" for k in keys))
    for n in args.grids:
        grid = RadialGrid(R=args.R, n=n)
        for jumps in args.jumps:
            for seed in args.seeds:
                cfg = FlowConfig(dt=args.dt, T=args.T, grid=grid, norms=keys,
                                 perturbation=Perturbation(1e-3, "rough", (2.0, args.R - 2.0), seed, jumps))
                tr = run_flow(cfg)
                c00 = tr.norms["c0"][0]
                s = [smoothing_exponent(tr.times, tr.norms[k], c00, (10 * args.dt, args.T)).rate for k in keys]
                print(f"{n},{jumps},{seed}," + ",".join(f"{x:.4f}" for x in s))


if __name__ == "__main__":
    main()
