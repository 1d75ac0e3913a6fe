"""Mean, variance and long-time behaviour of the fractional OU process.

The variance is ``int_0^t s**(2(beta-gamma)) E_{beta,rho}(-a s**beta)**2 ds`` with
``rho = beta - gamma + 1``. Its integrand has a power-law endpoint
singularity at 0 and a power-law tail ``~ s**(-2 gamma)`` at infinity, so the
integral is computed on dyadic panels ``[s/2, s]`` (a geometric mesh in
both directions) with a Gauss-Legendre rule per panel, plus closed-form
pieces near 0 and, for the limit, beyond the last panel.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ClassicalSolutionError, DomainError, check_classical
from .special_functions import ml_y, rgamma
from .volterra_sim import FouParams

__all__ = [
    "FouParams",
    "Regime",
    "RegimeTag",
    "fou_mean",
    "fou_variance",
    "fou_limit_variance",
    "fsode_variance",
    "regime_classify",
]

_PANEL_NODES = 20
_SMALL_ARG = 1e-10
_TAIL_ARG = 1e4
_TAIL_TERMS = 6


class RegimeTag(str, enum.Enum):
    GENERALIZED_ONLY = "GeneralizedOnly"
    CONVERGENT_GAUSSIAN = "ConvergentGaussian"
    LOG_GROWTH = "LogGrowth"
    POWER_GROWTH = "PowerGrowth"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    exponent: float | None = None

    def __str__(self) -> str:
        if self.tag is RegimeTag.POWER_GROWTH:
            return f"{self.tag.value}{{{self.exponent:g}}}"
        return self.tag.value


def _check_orders(beta: float, gamma: float) -> None:
    if not (0.0 < beta <= 1.0 and 0.0 < gamma <= 1.0):
        raise DomainError(f"beta and gamma must lie in (0, 1], got beta={beta!r}, gamma={gamma!r}")


def regime_classify(beta: float, gamma: float) -> Regime:
    """Long-time behaviour of the fractional OU process (``a > 0``).

    ``gamma == 1/2`` is tested by exact equality.
    """
    _check_orders(beta, gamma)
    if beta - gamma <= -0.5:
        return Regime(RegimeTag.GENERALIZED_ONLY)
    if gamma > 0.5:
        return Regime(RegimeTag.CONVERGENT_GAUSSIAN)
    if gamma == 0.5:
        return Regime(RegimeTag.LOG_GROWTH)
    return Regime(RegimeTag.POWER_GROWTH, 1.0 - 2.0 * gamma)


def fou_mean(p: FouParams, t):
    """``X0 E_beta(-a t**beta)``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be non-negative")
    return p.X0 * ml_y(p.beta, 1.0, -p.a, t)


def fsode_variance(beta: float, gamma: float, t):
    """Variance ``t**r / (r Gamma(1+beta-gamma)**2)``, ``r = 2(beta-gamma)+1``, of the drift-free solution."""
    _check_orders(beta, gamma)
    check_classical(beta, gamma)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("t must be positive")
    r = 2.0 * (beta - gamma) + 1.0
    return np.power(t, r) * rgamma(beta - gamma + 1.0) ** 2 / r


def _integrand(beta: float, gamma: float, a: float):
    rho = beta - gamma + 1.0
    return lambda s: ml_y(beta, rho, -a, s) ** 2


def _panel_sum(f, upper: float, lower: float) -> float:
    """Integral of ``f`` over ``[lower, upper]`` on dyadic panels ``[s/2, s]``."""
    n_panels = max(1, math.ceil(math.log2(upper / lower)))
    right = upper * 0.5 ** np.arange(n_panels)
    left = right * 0.5
    x, w = np.polynomial.legendre.leggauss(_PANEL_NODES)
    half = 0.5 * (right - left)
    nodes = (0.5 * (right + left))[:, None] + half[:, None] * x[None, :]
    vals = f(nodes.ravel()).reshape(nodes.shape)
    return float(np.sum(vals @ w * half)), float(left[-1])


def _variance_from_zero(beta: float, gamma: float, a: float, t: float) -> float:
    e = beta - gamma
    r = 2.0 * e + 1.0
    rho = e + 1.0
    # Below s_min the Mittag-Leffler factor is 1/Gamma(rho) to relative accuracy _SMALL_ARG.
    s_min = t if a == 0 else min(t, (_SMALL_ARG / abs(a)) ** (1.0 / beta))
    total = 0.0
    if s_min < t:
        total, s_min = _panel_sum(_integrand(beta, gamma, a), t, s_min)
    return total + s_min**r * rgamma(rho) ** 2 / r


def fou_variance(p: FouParams, t):
    """Variance of ``X(t)`` for ``t > 0``; exact closed form when ``a = 0``."""
    _check_orders(p.beta, p.gamma)
    check_classical(p.beta, p.gamma, "the fractional OU variance")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0) or not np.all(np.isfinite(t_arr)):
        raise DomainError("t must be positive and finite")
    if p.a == 0:
        return fsode_variance(p.beta, p.gamma, t)
    out = np.array([_variance_from_zero(p.beta, p.gamma, p.a, float(s)) for s in t_arr.ravel()])
    return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def _tail_integral(beta: float, gamma: float, a: float, S: float) -> float:
    """``int_S^inf`` of the squared inverse-power expansion of the integrand."""
    e = beta - gamma
    rho = e + 1.0
    k = np.arange(1, _TAIL_TERMS + 1)
    c = (-1.0) ** (k + 1) * rgamma(rho - beta * k)
    total = 0.0
    for i in range(1, _TAIL_TERMS + 1):
        for j in range(1, _TAIL_TERMS + 1):
            expo = 2.0 * e - beta * (i + j)
            total += c[i - 1] * c[j - 1] * float(a) ** (-(i + j)) * S ** (expo + 1.0) / (-(expo + 1.0))
    return total


def fou_limit_variance(a: float, beta: float, gamma: float) -> float:
    """Limit ``int_0^inf s**(2(beta-gamma)) E_{beta,rho}(-a s**beta)**2 ds``; needs ``gamma > 1/2``, ``a > 0``."""
    _check_orders(beta, gamma)
    if beta - gamma <= -0.5:
        raise ClassicalSolutionError(beta, gamma, "the limiting variance")
    if not gamma > 0.5:
        regime = regime_classify(beta, gamma)
        raise DomainError(
            f"the variance diverges for gamma <= 1/2 (regime {regime}): the integrand decays like s**(-2 gamma)"
        )
    if not (math.isfinite(a) and a > 0):
        raise DomainError(f"a must be positive, got {a!r}")
    S = (_TAIL_ARG / a) ** (1.0 / beta)
    return _variance_from_zero(beta, gamma, a, S) + _tail_integral(beta, gamma, a, S)
