"""Fitted decay rate of the flow against the weight exponent and amplitude."""

import argparse

from cuspflow.cusp_model import WeightSpec
from cuspflow.flow import FlowConfig, Perturbation, fit_decay_rate, run_flow


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambdas", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.0])
    ap.add_argument("--amplitudes", type=float, nargs="+", default=[1e-4, 1e-3, 1e-2])
    ap.add_argument("--T", type=float, default=12.0)
    ap.add_argument("--dt", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print("lambda,amplitude,threshold,rate_x0,rate_x1,ci_x1_lo,ci_x1_hi")
    for lam in args.lambdas:
        for amp in args.amplitudes:
            cfg = FlowConfig(dt=args.dt, T=args.T, weight=WeightSpec(lam), norms=("x0", "x1"),
                             perturbation=Perturbation(amp, "bump", (4.0, 12.0), args.seed))
            tr = run_flow(cfg)
            f0 = fit_decay_rate(tr.times, tr.norms["x0"], (2.0, args.T))
            f1 = fit_decay_rate(tr.times, tr.norms["x1"], (2.0, args.T))
            print(f"{lam},{amp},{lam * (2 - lam):.4f},{f0.rate:.4f},{f1.rate:.4f},{f1.ci[0]:.4f},{f1.ci[1]:.4f}")


if __name__ == "__main__":
    main()
