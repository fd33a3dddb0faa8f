"""Truncation error of rhs(h0) and of A applied to the trivial Einstein field against dr.

Prints the sup norms, their refinement ratios and the spacing at which the
fitted dr^2 law reaches a target bound.
"""

import argparse

import numpy as np

from cuspflow.cusp_model import RadialGrid, background_metric, trivial_einstein
from cuspflow.operators import deturck_rhs, linearized_apply


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", type=int, nargs="+", default=[200, 399, 797, 1593])
    ap.add_argument("--target", type=float, default=1e-3)
    args = ap.parse_args()
    rows = []
    for n in args.ns:
        g = RadialGrid(n=n)
        rhs = np.abs(deturck_rhs(background_metric(g)).comps[1:-1]).max()
        u = trivial_einstein(g)
        ein = np.abs(linearized_apply(u).frame()[1:-1]).max() / np.abs(u.frame()).max()
        rows.append((g.dr, rhs, ein))
    print("dr,rhs_h0,A_einstein")
    for r in rows:
        print(",".join(f"{x:.6g}" for x in r))
    dr = np.array([r[0] for r in rows])
    for j, name in ((1, "rhs_h0"), (2, "A_einstein")):
        v = np.array([r[j] for r in rows])
        c = np.exp(np.mean(np.log(v / dr**2)))
        print(f"{name}: ~{c:.4g} dr^2, reaches {args.target:g} at dr = {np.sqrt(args.target / c):.4g}")


if __name__ == "__main__":
    main()
