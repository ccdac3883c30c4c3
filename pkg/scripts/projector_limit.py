#!/usr/bin/env python3
"""Low-temperature limit of the aligned ball projector: phi1(P_n) -> 1.

Tabulates the closed-form expectation along an increasing beta grid.
"""

import argparse

import numpy as np

from cayley_qmc.analysis import projector_limit_scan


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--j0", type=float, default=1.0)
    ap.add_argument("--j", type=float, default=0.3)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--beta-min", type=float, default=1.0)
    ap.add_argument("--beta-max", type=float, default=5.0)
    ap.add_argument("--steps", type=int, default=9)
    args = ap.parse_args()

    betas = [float(b) for b in np.linspace(args.beta_min, args.beta_max, args.steps)]
    rows = projector_limit_scan(args.j0, args.j, args.n, betas)
    print(f"j0={args.j0} j={args.j} n={args.n}")
    print(f"{'beta':>8}  {'phi1(P_n)':>22}  {'phi1(Q_n)':>12}  {'|phi1(P_n)-1|':>13}")
    for r in rows:
        print(f"{r['beta']:8.3f}  {r['phi1_pn']:22.16f}  {r['phi1_qn']:12.6e}  {r['dev_from_one']:13.6e}")


if __name__ == "__main__":
    main()
