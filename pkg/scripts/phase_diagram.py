"""Classifier verdicts on an (alpha, gamma) grid, with optional growth probes.

Writes the sweep CSV (``beta,gamma,alpha,nu,b,sigma,verdict,reason``); with
``--probe`` an extra ``growth`` column holds ``V(T)`` at ``|y| = 64`` over
``|y| = 1`` for every classical point.
"""

import argparse
import csv
import sys

import numpy as np

from fracsde import GridSpec
from fracsde.errors import ClassicalSolutionError
from fracsde.spde_analysis import SWEEP_HEADER, growth_probe, sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--nu", type=float, default=1.0)
    ap.add_argument("--b", type=float, default=1.0)
    ap.add_argument("--sigma", type=float, default=1.0)
    ap.add_argument("--n", type=int, default=9, help="grid points per axis")
    ap.add_argument("--probe", action="store_true")
    ap.add_argument("--n-steps", type=int, default=128)
    args = ap.parse_args()

    gammas = np.linspace(0.1, 1.0, args.n)
    alphas = np.linspace(0.25, 2.0, args.n)
    rows = sweep([args.beta], gammas, alphas, [args.nu], [args.b], [args.sigma])
    header = list(SWEEP_HEADER) + (["growth"] if args.probe else [])
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(header)
    grid = GridSpec(1.0, args.n_steps)
    for row in rows:
        rec = row.as_record()
        values = [rec[k] for k in SWEEP_HEADER]
        if args.probe:
            try:
                (_, r1), (_, r64) = growth_probe(row.params, [1.0, 64.0], grid)
                values.append(f"{r64 / r1:.4g}")
            except ClassicalSolutionError:
                values.append("")
        out.writerow(values)


if __name__ == "__main__":
    main()
