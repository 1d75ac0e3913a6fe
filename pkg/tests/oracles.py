"""Independent high-precision reference values built on mpmath."""

from __future__ import annotations

import mpmath as mp


def ml_series_mp(beta: float, rho: float, z: float, digits: int = 30) -> float:
    """Power series of the Mittag-Leffler function in arbitrary precision.

    The working precision is raised by the size of the largest term, about
    ``exp(peak)``, and again by as much for results as small as ``exp(-peak)``
    (``beta`` near 1), so the alternating series for negative ``z`` keeps
    ``digits`` correct digits.
    """
    peak = abs(z) ** (1.0 / beta) if z else 0.0
    with mp.workdps(digits + int(2 * peak / 2.3) + 10):
        zz = mp.mpf(z)
        b = mp.mpf(beta)
        r = mp.mpf(rho)
        total = mp.mpf(0)
        k = 0
        tol = mp.mpf(10) ** (-(digits + 5))
        while True:
            term = zz**k * mp.rgamma(b * k + r)
            total += term
            # Past the peak the terms shrink monotonically; stop on a relative test.
            if k > peak / beta + 10 and abs(term) < tol * abs(total):
                break
            k += 1
        return float(total)


def limit_variance_mp(a: float, beta: float, gamma: float) -> float:
    """``int_0^inf Phi(s)**2 ds`` via Plancherel on the Laplace transform.

    ``Phi`` has transform ``lam**(gamma-1) / (lam**beta + a)``; on the
    imaginary axis its squared modulus is
    ``w**(2 gamma - 2) / (w**(2 beta) + 2 a w**beta cos(pi beta / 2) + a**2)``.
    The frequency integral is taken in ``u = log w`` because both tails decay
    only like small powers of ``w``.
    """
    with mp.workdps(30):
        c = mp.cos(mp.pi * beta / 2)

        def f(u):
            w = mp.exp(u)
            wb = w**beta
            return w ** (2 * gamma - 1) / (wb * wb + 2 * a * wb * c + a * a)

        cuts = [-mp.inf] + list(range(-200, 201, 10)) + [mp.inf]
        return float(mp.quad(f, cuts) / mp.pi)


def fou_variance_mp(a: float, beta: float, gamma: float, t: float) -> float:
    """``int_0^t s**(2(beta-gamma)) E_{beta,rho}(-a s**beta)**2 ds`` by tanh-sinh quadrature."""
    rho = beta - gamma + 1.0
    with mp.workdps(25):

        def f(s):
            if s == 0:
                return mp.mpf(0) if rho > 1 else mp.rgamma(rho) ** 2
            e = ml_series_mp(beta, rho, float(-a * s**beta), 20)
            return s ** (2 * (beta - gamma)) * mp.mpf(e) ** 2

        return float(mp.quad(f, [0, t]))
