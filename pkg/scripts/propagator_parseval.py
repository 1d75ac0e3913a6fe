"""Truncated chaos sums of the fractional GBM against the second-moment series.

Prints ``sum X_alpha(T)**2`` over ``|alpha| <= N`` and modes ``<= K`` as a
fraction of ``E X(T)**2``.
"""

import argparse

from fracsde import GbmParams, GridSpec, gbm_propagator, gbm_second_moment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--a", type=float, default=0.5)
    ap.add_argument("--sigma", type=float, default=0.5)
    ap.add_argument("--beta", type=float, default=0.9)
    ap.add_argument("--gamma", type=float, default=0.6)
    ap.add_argument("--K", type=int, default=32)
    ap.add_argument("--N", type=int, default=4)
    ap.add_argument("--n-steps", type=int, default=256)
    args = ap.parse_args()

    p = GbmParams(1.0, args.a, args.sigma, args.beta, args.gamma)
    table = gbm_propagator(p, args.K, args.N, GridSpec(1.0, args.n_steps))
    target = gbm_second_moment(p, 1.0, n_steps=args.n_steps)
    Ks = [k for k in (1, 2, 4, 8, 16, 32, 64, 128) if k < args.K] + [args.K]
    print(f"E X(1)^2 = {target:.10g}; table holds {len(table)} coefficients")
    print("K," + ",".join(f"N={n}" for n in range(args.N + 1)))
    for K in Ks:
        print(f"{K}," + ",".join(f"{table.partial_second_moment(K, n) / target:.6f}" for n in range(args.N + 1)))


if __name__ == "__main__":
    main()
