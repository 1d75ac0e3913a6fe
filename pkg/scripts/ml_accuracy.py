"""Relative error of ml_eval against a high-precision series on a (beta, z) grid.

Writes CSV ``beta,rho,z,value,reference,rel_error`` to standard output. Needs mpmath.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from fracsde import ml_eval

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from oracles import ml_series_mp  # noqa: E402


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rho", type=float, default=1.0)
    ap.add_argument("--betas", type=float, nargs="+", default=[0.3, 0.5, 0.7, 0.9, 1.0])
    ap.add_argument("--n-z", type=int, default=21)
    args = ap.parse_args()

    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["beta", "rho", "z", "value", "reference", "rel_error"])
    worst = 0.0
    for beta in args.betas:
        # Oracle cost grows with |z|**(1/beta); cap it as in the test suite.
        zmax = min(40.0, 150.0**beta)
        for z in np.linspace(-zmax, zmax, args.n_z):
            value = ml_eval(beta, args.rho, z)
            ref = ml_series_mp(beta, args.rho, float(z), digits=20)
            rel = abs(value - ref) / max(abs(ref), 1e-300)
            worst = max(worst, rel)
            out.writerow([beta, args.rho, repr(float(z)), repr(value), repr(ref), f"{rel:.3e}"])
    print(f"max relative error {worst:.3e}", file=sys.stderr)


if __name__ == "__main__":
    main()
