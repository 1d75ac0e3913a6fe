r"""Gamma and two-parameter Mittag-Leffler functions on the real line.

The Mittag-Leffler function

.. math::

    E_{\beta,\rho}(z) = \sum_{k \ge 0} \frac{z^k}{\Gamma(\beta k + \rho)}

is evaluated by one of three branches, chosen per argument:

* ``series``: the power series with Neumaier-compensated summation. Used for
  non-negative arguments until ``z**(1/beta)`` nears float64 overflow and for
  negative arguments small enough that the alternating terms do not cancel
  catastrophically.
* ``asymptotic``: the inverse-power expansion
  :math:`E_{\beta,\rho}(z) \approx \frac{1}{\beta} z^{(1-\rho)/\beta}
  e^{z^{1/\beta}} - \sum_{k=1}^{K} z^{-k} / \Gamma(\rho - \beta k)`,
  where the exponential term is present only for positive ``z``. Used for
  large positive ``z`` and for negative ``z`` beyond ``switch_radius`` when
  the first omitted term is below double-precision rounding.
* ``contour``: numerical inversion of the Laplace transform
  :math:`s^{\beta-\rho} / (s^\beta - z)` on a parabolic Bromwich contour.
  Used for negative arguments in the range where the float64 series has
  cancelled away and the divergent expansion is not yet accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, check_classical

__all__ = [
    "EvalConfig",
    "MLIndex",
    "DEFAULT_CONFIG",
    "gamma_eval",
    "log_abs_gamma",
    "rgamma",
    "ml_eval",
    "ml_y_eval",
    "phi_eval",
    "mittag_leffler",
    "ml_series",
    "ml_asymptotic",
    "ml_contour",
    "ml_y",
]

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = np.array(
    [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ]
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class EvalConfig:
    """Tuning knobs for :func:`ml_eval`."""

    series_tol: float = 1e-16
    max_terms: int = 10_000
    switch_radius: float = 10.0
    asymptotic_terms: int = 8

    def __post_init__(self):
        if not self.series_tol > 0:
            raise DomainError("series_tol must be positive")
        if self.max_terms < 1:
            raise DomainError("max_terms must be at least 1")
        if not self.switch_radius > 0:
            raise DomainError("switch_radius must be positive")
        if self.asymptotic_terms < 1:
            raise DomainError("asymptotic_terms must be at least 1")


DEFAULT_CONFIG = EvalConfig()


@dataclass(frozen=True)
class MLIndex:
    """Parameters of :math:`y_{\\beta,\\rho}(t) = t^{\\rho-1}E_{\\beta,\\rho}(a t^\\beta)`."""

    beta: float
    rho: float
    a: float = 0.0

    def __post_init__(self):
        _check_index(self.beta, self.rho)
        if not math.isfinite(self.a):
            raise DomainError("a must be finite")


def _check_index(beta: float, rho: float) -> None:
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if not (0.0 < rho <= 2.0):
        raise DomainError(f"rho must lie in (0, 2], got {rho!r}")


# ---------------------------------------------------------------------------
# Gamma function


def _lanczos_sum(y):
    acc = np.full_like(y, _LANCZOS_P[0])
    for i in range(1, 9):
        acc = acc + _LANCZOS_P[i] / (y + i)
    return acc


def _is_pole(x):
    return (x <= 0) & (x == np.floor(x))


_FACTORIALS = np.array([float(math.factorial(k)) for k in range(171)])


def _gamma_array(x):
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    small = x < 0.5
    big = ~small
    if np.any(big):
        y = x[big] - 1.0
        t = y + _LANCZOS_G + 0.5
        # t**(y+0.5) split in two halves to delay overflow up to x ~ 171.
        half = np.power(t, 0.5 * (y + 0.5))
        out[big] = math.sqrt(2.0 * math.pi) * half * np.exp(-t) * half * _lanczos_sum(y)
    if np.any(small):
        xs = x[small]
        # Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x).
        out[small] = math.pi / (_sin_pi(xs) * _gamma_array(1.0 - xs))
    integer = (x >= 1) & (x <= 171) & (x == np.floor(x))
    if np.any(integer):
        out[integer] = _FACTORIALS[x[integer].astype(int) - 1]
    return out


def _sin_pi(x):
    # sin(pi x) with exact zeros at integers; reducing to |r| <= 1/2 keeps
    # full relative accuracy next to the zeros.
    n = np.round(x)
    r = x - n
    sign = np.where(np.remainder(n, 2.0) == 0, 1.0, -1.0)
    return np.where(r == 0, 0.0, sign * np.sin(math.pi * r))


def gamma_eval(x):
    """Gamma function for real arguments.

    Raises :class:`DomainError` at the poles ``0, -1, -2, ...``.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(_is_pole(arr)):
        raise DomainError(f"Gamma has a pole at non-positive integer argument {x!r}")
    out = _gamma_array(arr)
    return float(out) if np.ndim(x) == 0 else out


def log_abs_gamma(x):
    """``log|Gamma(x)|``; ``+inf`` at the poles."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pole = _is_pole(x)
    out[pole] = np.inf
    big = (x >= 0.5) & ~pole
    if np.any(big):
        y = x[big] - 1.0
        t = y + _LANCZOS_G + 0.5
        out[big] = _HALF_LOG_2PI + (y + 0.5) * np.log(t) - t + np.log(_lanczos_sum(y))
    small = (x < 0.5) & ~pole
    if np.any(small):
        xs = x[small]
        out[small] = math.log(math.pi) - np.log(np.abs(_sin_pi(xs))) - log_abs_gamma(1.0 - xs)
    return out


def rgamma(x):
    """``1/Gamma(x)``, equal to zero at the poles; computed in log form beyond ``|x| = 150``."""
    arr = np.asarray(x, dtype=float)
    out = np.zeros_like(arr)
    pole = _is_pole(arr)
    moderate = ~pole & (np.abs(arr) < 150.0)
    if np.any(moderate):
        out[moderate] = 1.0 / _gamma_array(arr[moderate])
    large = ~pole & ~moderate
    if np.any(large):
        xl = arr[large]
        pos = xl > 0
        val = np.empty_like(xl)
        val[pos] = np.exp(-log_abs_gamma(xl[pos]))
        # 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi for very negative x.
        neg = ~pos
        with np.errstate(over="ignore"):
            val[neg] = np.exp(log_abs_gamma(1.0 - xl[neg]) - math.log(math.pi)) * _sin_pi(xl[neg])
        out[large] = val
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# Mittag-Leffler branches


def ml_series(beta: float, rho: float, z, cfg: EvalConfig = DEFAULT_CONFIG):
    """Power series with compensated summation.

    Stops once a term past the peak falls below
    ``series_tol * max(1, |partial sum|)``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    out = np.zeros_like(z)
    flat = z.ravel()
    res = out.ravel()
    nonzero = flat != 0.0
    res[~nonzero] = rgamma(rho)
    if not np.any(nonzero):
        return out
    idx = np.flatnonzero(nonzero)
    zz = flat[idx]
    logabs = np.log(np.abs(zz))
    negative = zz < 0
    # The terms peak near beta*k + rho ~ |z|**(1/beta).
    k_peak = (np.abs(zz) ** (1.0 / beta) - rho) / beta + 1.0
    total = np.full(zz.shape, rgamma(rho))
    comp = np.zeros_like(total)
    active = np.arange(zz.size)
    for k in range(1, cfg.max_terms):
        arg = beta * k + rho
        lg = float(log_abs_gamma(arg))
        mag = np.exp(k * logabs[active] - lg)
        sgn = 1.0 if arg > 0 else (-1.0 if math.floor(arg) % 2 else 1.0)
        if math.isinf(lg):
            mag = np.zeros_like(mag)
        term = sgn * np.where(negative[active] & (k % 2 == 1), -mag, mag)
        s = total[active]
        t_new = s + term
        comp[active] += np.where(np.abs(s) >= np.abs(term), (s - t_new) + term, (term - t_new) + s)
        total[active] = t_new
        done = (k > k_peak[active]) & (mag < cfg.series_tol * np.maximum(1.0, np.abs(t_new)))
        active = active[~done]
        if active.size == 0:
            break
    else:
        raise ConvergenceError(
            f"Mittag-Leffler series did not reach tolerance {cfg.series_tol:g} within "
            f"{cfg.max_terms} terms (beta={beta:g}, rho={rho:g}, max |z|={np.max(np.abs(zz)):g})"
        )
    res[idx] = total + comp
    return out


def ml_asymptotic(beta: float, rho: float, z, terms: int = 8, return_error: bool = False):
    """Large-``|z|`` expansion with optimal truncation of the inverse-power sum.

    With ``return_error`` the magnitude of the first omitted term is returned
    as a per-point error estimate.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    # A few extra terms so the error estimate can skip coefficients that vanish
    # at poles of Gamma.
    ks = np.arange(1, terms + 5)
    coef = rgamma(rho - beta * ks)
    absz = np.abs(z)[..., None]
    mags = np.abs(coef) * absz ** (-ks.astype(float))
    # Optimal truncation: keep terms while no non-zero term exceeds the smallest seen so far.
    running = np.minimum.accumulate(np.where(mags > 0, mags, np.inf), axis=-1)
    grows = (mags > 0) & (mags > np.concatenate([np.full(z.shape + (1,), np.inf), running[..., :-1]], axis=-1))
    keep = np.cumsum(grows, axis=-1) == 0
    keep[..., terms:] = False
    powers = np.power(z[..., None], -ks.astype(float))
    total = -np.sum(np.where(keep, coef * powers, 0.0), axis=-1)
    omitted = np.where(~keep & (np.cumsum(~keep, axis=-1) > 0), mags, 0.0)
    first_nonzero = np.argmax(omitted > 0, axis=-1)
    err = np.take_along_axis(omitted, first_nonzero[..., None], axis=-1)[..., 0]
    err = np.where(np.any(omitted > 0, axis=-1), err, 0.0)
    pos = z > 0
    if np.any(pos):
        zp = z[pos]
        log_exp = zp ** (1.0 / beta) + (1.0 - rho) / beta * np.log(zp) - math.log(beta)
        with np.errstate(over="ignore"):
            total[pos] = total[pos] + np.exp(log_exp)
    if return_error:
        return total, err
    return total


def _contour_nodes(n: int):
    theta = (np.arange(n) + 0.5) * (2.0 * math.pi / n) - math.pi
    s = n * (0.1309 - 0.1194 * theta**2 + 0.25j * theta)
    ds = n * (-2.0 * 0.1194 * theta + 0.25j)
    return s, ds * (2.0 * math.pi / n) / (2.0j * math.pi)


_NODES = {n: _contour_nodes(n) for n in (32, 40)}


def ml_contour(beta: float, rho: float, z):
    """Laplace inversion of ``s**(beta-rho) / (s**beta - z)`` at time 1.

    Only valid for ``z <= 0`` and ``0 < beta <= 1``, where the transform has no
    poles off the branch cut. ``rho > 2`` is reduced with
    ``E_{b,r}(z) = (E_{b,r-b}(z) - 1/Gamma(r-b)) / z``.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if rho > 2.0:
        lower = ml_contour(beta, rho - beta, z)
        return (lower - rgamma(rho - beta)) / z
    s, w = _NODES[32 if rho <= 1.5 else 40]
    log_s = np.log(s)
    s_beta = np.exp(beta * log_s)
    num = np.exp(s + (beta - rho) * log_s) * w
    vals = num / (s_beta - z.ravel()[:, None])
    return np.real(vals.sum(axis=1)).reshape(z.shape)


# ---------------------------------------------------------------------------
# Dispatcher


def mittag_leffler(beta: float, rho: float, z, cfg: EvalConfig = DEFAULT_CONFIG):
    """Mittag-Leffler function without the public parameter-range checks.

    Accepts any ``beta > 0`` and ``rho > 0``; negative arguments require
    ``beta <= 1`` unless the series is safe. On the contour branch the error
    is absolute, about ``1e-16``: for ``beta`` within ``1e-12`` of 1 the
    nearly exponential decay drops below that floor and relative accuracy is
    lost there.
    """
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if beta == 1.0 and rho == 1.0:
        out = np.exp(z)
        return float(out[0]) if scalar else out
    out = np.empty_like(z)
    absz = np.abs(z)
    with np.errstate(over="ignore"):
        scale = absz ** (1.0 / beta)
    pos = z >= 0
    neg = ~pos

    # Positive terms do not cancel, so the series is used as far as float64 allows;
    # the divergent inverse-power sum of the expansion limits its accuracy when
    # z**(1/beta) is moderate.
    pos_series = pos & (scale <= 700.0)
    pos_asym = pos & ~pos_series
    neg_series = neg & (scale <= 1.5) & (absz <= cfg.switch_radius)
    neg_rest = neg & ~neg_series

    if np.any(pos_series | neg_series):
        m = pos_series | neg_series
        out[m] = ml_series(beta, rho, z[m], cfg)
    if np.any(pos_asym):
        out[pos_asym] = ml_asymptotic(beta, rho, z[pos_asym], cfg.asymptotic_terms)
    if np.any(neg_rest):
        if beta > 1.0:
            raise DomainError("negative arguments with beta > 1 are outside the supported range")
        zn = z[neg_rest]
        vals = np.empty_like(zn)
        cand = (np.abs(zn) >= cfg.switch_radius) & (np.abs(zn) ** (1.0 / beta) >= 36.0)
        use_asym = np.zeros_like(cand)
        if np.any(cand):
            asym, err = ml_asymptotic(beta, rho, zn[cand], cfg.asymptotic_terms, return_error=True)
            ok = err <= 4e-16 * np.abs(asym)
            sub = np.flatnonzero(cand)[ok]
            vals[sub] = asym[ok]
            use_asym[sub] = True
        rest = ~use_asym
        if np.any(rest):
            vals[rest] = ml_contour(beta, rho, zn[rest])
        out[neg_rest] = vals
    return float(out[0]) if scalar else out


def ml_eval(idx_beta: float, idx_rho: float, z, cfg: EvalConfig = DEFAULT_CONFIG):
    """Two-parameter Mittag-Leffler function :math:`E_{\\beta,\\rho}(z)`, real ``z``.

    ``0 < beta <= 1`` and ``0 < rho <= 2``. ``z`` may be a scalar or an array.
    """
    _check_index(idx_beta, idx_rho)
    if not np.all(np.isfinite(z)):
        raise DomainError("Mittag-Leffler argument must be finite")
    return mittag_leffler(idx_beta, idx_rho, z, cfg)


def ml_y(beta: float, rho: float, a: float, t, cfg: EvalConfig = DEFAULT_CONFIG):
    """Unchecked ``t**(rho-1) * E_{beta,rho}(a t**beta)`` for ``t >= 0``.

    Returns 0 at ``t = 0`` when ``rho > 1`` and ``1/Gamma(rho)`` when ``rho == 1``.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    pos = t > 0
    tp = t[pos]
    out[pos] = tp ** (rho - 1.0) * mittag_leffler(beta, rho, a * tp**beta, cfg)
    zero = ~pos
    if np.any(zero):
        if rho == 1.0:
            out[zero] = rgamma(1.0)
        elif rho < 1.0:
            out[zero] = np.inf
    return float(out[0]) if scalar else out


def ml_y_eval(idx: MLIndex, t, cfg: EvalConfig = DEFAULT_CONFIG):
    """:math:`y_{\\beta,\\rho}(t) = t^{\\rho-1} E_{\\beta,\\rho}(a t^\\beta)`."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be non-negative")
    if idx.rho < 1.0 and np.any(t_arr == 0):
        raise DomainError(f"y_(beta,rho) is singular at t = 0 for rho = {idx.rho:g} < 1")
    return ml_y(idx.beta, idx.rho, idx.a, t, cfg)


def phi_eval(beta: float, gamma: float, a: float, t, cfg: EvalConfig = DEFAULT_CONFIG):
    """Resolvent kernel :math:`\\Phi(t) = t^{\\beta-\\gamma} E_{\\beta,\\beta-\\gamma+1}(a t^\\beta)`."""
    if not (0.0 < beta <= 1.0 and 0.0 < gamma <= 1.0):
        raise DomainError("beta and gamma must lie in (0, 1]")
    check_classical(beta, gamma, "the kernel Phi")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("Phi is evaluated for t > 0 only")
    return ml_y(beta, beta - gamma + 1.0, a, t, cfg)
