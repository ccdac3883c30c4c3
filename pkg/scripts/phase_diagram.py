#!/usr/bin/env python3
"""Reproduce the phase-diagram dataset: Delta sign over the (J, J0) plane.

Writes one CSV per inverse temperature and prints region counts.
"""

import argparse
import pathlib

from cayley_qmc.analysis import phase_diagram_scan
from cayley_qmc.cli import render_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.3, 1.0])
    ap.add_argument("--j-min", type=float, default=-2.4)
    ap.add_argument("--j-max", type=float, default=2.4)
    ap.add_argument("--j0-min", type=float, default=0.03)
    ap.add_argument("--j0-max", type=float, default=2.43)
    ap.add_argument("--resolution", type=int, default=50)
    ap.add_argument("--out-dir", type=pathlib.Path, default=pathlib.Path("out"))
    args = ap.parse_args()

    args.out_dir.mkdir(parents=True, exist_ok=True)
    for beta in args.betas:
        rows = phase_diagram_scan(args.j_min, args.j_max, args.j0_min, args.j0_max, beta, args.resolution)
        path = args.out_dir / f"phase_diagram_beta{beta:g}.csv"
        path.write_text(
            render_csv(
                ["j", "j0", "delta", "classification", "threshold"],
                [(r.j, r.j0, r.delta, r.classification, r.threshold) for r in rows],
            )
        )
        counts = {}
        for r in rows:
            counts[r.classification] = counts.get(r.classification, 0) + 1
        print(f"beta={beta:g}: {counts} -> {path}")


if __name__ == "__main__":
    main()
