"""Long-time variance of the fractional OU process in each regime.

For every ``gamma`` prints the regime, the fitted log-log slope of the
variance over ``[t_lo, t_hi]`` and the predicted exponent (or the limit).
"""

import argparse
import sys

import numpy as np

from fracsde import FouParams, fou_limit_variance, fou_variance, regime_classify
from fracsde.fou_analysis import RegimeTag


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=1.0)
    ap.add_argument("--beta", type=float, default=0.8)
    ap.add_argument("--gammas", type=float, nargs="+", default=[0.2, 0.3, 0.4, 0.5, 0.6, 0.7])
    ap.add_argument("--t-lo", type=float, default=1e3)
    ap.add_argument("--t-hi", type=float, default=1e5)
    args = ap.parse_args()

    t = np.logspace(np.log10(args.t_lo), np.log10(args.t_hi), 9)
    print("gamma,regime,slope,prediction,variance_at_t_hi")
    for gamma in args.gammas:
        regime = regime_classify(args.beta, gamma)
        if regime.tag is RegimeTag.GENERALIZED_ONLY:
            print(f"{gamma},{regime},,,")
            continue
        v = fou_variance(FouParams(0.0, args.a, args.beta, gamma), t)
        slope = np.polyfit(np.log(t), np.log(v), 1)[0]
        if regime.tag is RegimeTag.POWER_GROWTH:
            prediction = regime.exponent
        elif regime.tag is RegimeTag.CONVERGENT_GAUSSIAN:
            prediction = fou_limit_variance(args.a, args.beta, gamma)
        else:
            prediction = np.log(10.0) / (np.pi * args.a**2)  # increment per decade
        print(f"{gamma},{regime},{slope:.6f},{prediction:.6f},{float(v[-1])!r}")
    sys.stdout.flush()


if __name__ == "__main__":
    main()
