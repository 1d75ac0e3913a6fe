"""Fractional integrals and derivatives of sampled paths.

Paths live on uniform grids ``t_i = i*T/n``. Integrals are computed by
piecewise-linear product integration (see :mod:`fracsde.quadrature`), which is
second order for smooth integrands regardless of the kernel singularity.
Derivatives differentiate a fractional integral with second-order finite
differences (central inside, one-sided at the ends).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError
from .quadrature import ConvolutionWeights, ml_weights, power_weights
from .special_functions import mittag_leffler, ml_y


@dataclass(frozen=True)
class SampledPath:
    """A function sampled at ``n_steps + 1`` equally spaced nodes on ``[0, T]``.

    ``values`` may contain infinities (an integrable singularity at ``t = 0`` is
    reported as ``inf``) but never NaN.
    """

    T: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise DomainError("a sampled path needs at least two nodes (n_steps >= 1)")
        if not (math.isfinite(self.T) and self.T > 0):
            raise DomainError(f"horizon T must be positive and finite, got {self.T!r}")
        if np.any(np.isnan(vals)):
            raise DomainError("sampled values must not contain NaN")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, fn: Callable[[np.ndarray], np.ndarray], T: float, n_steps: int) -> "SampledPath":
        t = np.linspace(0.0, T, n_steps + 1)
        return cls(T, np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape))

    @classmethod
    def constant(cls, c: float, T: float, n_steps: int) -> "SampledPath":
        return cls(T, np.full(n_steps + 1, float(c)))

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_steps + 1)

    @property
    def initial_value(self) -> float:
        return float(self.values[0])

    def with_values(self, values) -> "SampledPath":
        return SampledPath(self.T, values)


@dataclass(frozen=True)
class LaplaceGrid:
    """Strictly increasing positive transform variables."""

    lambdas: tuple[float, ...]

    def __post_init__(self):
        lam = tuple(float(x) for x in self.lambdas)
        if not lam:
            raise DomainError("LaplaceGrid needs at least one value")
        if any(not (math.isfinite(x) and x > 0) for x in lam):
            raise DomainError("Laplace variables must be positive and finite")
        if any(b <= a for a, b in zip(lam, lam[1:])):
            raise DomainError("Laplace variables must be strictly increasing")
        object.__setattr__(self, "lambdas", lam)

    def as_array(self) -> np.ndarray:
        return np.array(self.lambdas)


class IntegralKind(str, enum.Enum):
    RL = "RL"
    KOCHUBEI = "Kochubei"


@lru_cache(maxsize=64)
def _power_weights_cached(p: float, h: float, n: int) -> ConvolutionWeights:
    return power_weights(p, h, n)


def _integrate(p: float, values: np.ndarray, h: float) -> np.ndarray:
    return _power_weights_cached(float(p), float(h), values.shape[-1] - 1).apply(values)


def frac_integral(kind: IntegralKind | str, p: float, f: SampledPath) -> SampledPath:
    """Fractional integral of order ``p`` (``I^p f``) or its shifted variant ``J^p f = I^p(f - f(0))``.

    ``p = 0`` returns ``f`` (RL) or ``f - f(0)`` (Kochubei).
    """
    kind = IntegralKind(kind)
    if not (math.isfinite(p) and p >= 0):
        raise DomainError(f"integral order must be positive, got {p!r}")
    vals = f.values
    if not np.all(np.isfinite(vals)):
        raise DomainError("fractional integral needs finite samples")
    if kind is IntegralKind.KOCHUBEI:
        vals = vals - vals[0]
    if p == 0:
        return f.with_values(vals)
    return f.with_values(_integrate(p, vals, f.dt))


def _differentiate(g: np.ndarray, h: float) -> np.ndarray:
    return np.gradient(g, h, edge_order=2)


def _check_order(beta: float) -> None:
    if not (0.0 < beta < 1.0):
        raise DomainError(f"derivative order must lie in (0, 1), got {beta!r}")


def rl_derivative(beta: float, f: SampledPath) -> SampledPath:
    """Riemann-Liouville derivative ``d/dt I^(1-beta) f``.

    When ``f(0) != 0`` the derivative is singular at ``t = 0`` and that node is
    set to ``sign(f(0)) * inf``.
    """
    _check_order(beta)
    g = frac_integral(IntegralKind.RL, 1.0 - beta, f).values
    d = _differentiate(g, f.dt)
    f0 = f.initial_value
    if f0 != 0.0:
        d[0] = math.copysign(math.inf, f0)
    return f.with_values(d)


def caputo_derivative(beta: float, f: SampledPath) -> SampledPath:
    """Caputo derivative ``d/dt J^(1-beta) f``; annihilates constants."""
    _check_order(beta)
    g = frac_integral(IntegralKind.KOCHUBEI, 1.0 - beta, f).values
    return f.with_values(_differentiate(g, f.dt))


@dataclass(frozen=True)
class LaplaceResult:
    lambdas: np.ndarray
    values: np.ndarray
    truncation_bound: np.ndarray


def _power_law_fit(vals: np.ndarray, h: float) -> tuple[float, float]:
    """``(c, e)`` of the leading term of ``f ~ c t**e + d`` near 0.

    Uses the nodes ``h, 2h, 4h`` so that a constant offset ``d`` drops out;
    falls back to two nodes on very short grids.
    """
    e = None
    if vals.size > 4:
        f1, f2, f4 = vals[1], vals[2], vals[4]
        ratio = (f4 - f2) / (f2 - f1) if f2 != f1 else 0.0
        if ratio > 0:
            e = math.log2(ratio)
            c = (f2 - f1) / (h**e * (2.0**e - 1.0))
    if e is None:
        e = math.log(vals[2] / vals[1]) / math.log(2.0)
        c = vals[1] / h**e
    if not e > -1.0:
        raise DomainError("singularity at t = 0 is not integrable")
    return c, e


def laplace_numeric(f: SampledPath, grid: LaplaceGrid) -> LaplaceResult:
    """Truncated Laplace transform ``int_0^T f(t) exp(-lam t) dt``.

    The exponential is integrated exactly against the piecewise-linear
    interpolant of ``f`` (a trapezoid rule that stays accurate when
    ``lam * dt`` is not small). An infinite ``f(0)`` is treated as a
    power-law singularity ``c t**e`` fitted on the first few nodes: that
    term is transformed in closed form and only the remainder goes through
    the linear rule. The returned bound estimates the omitted tail as
    ``|f(T)| exp(-lam T) / lam``.
    """
    lam = grid.as_array()
    h = f.dt
    vals = f.values
    t = f.t
    result = np.zeros_like(lam)
    if not math.isfinite(vals[0]):
        c, e = _power_law_fit(vals, h)
        result += c * special.gamma(e + 1.0) * special.gammainc(e + 1.0, lam * f.T) / lam ** (e + 1.0)
        rest = vals.copy()
        rest[1:] -= c * t[1:] ** e
        # The remainder is bounded at 0; extrapolate its value there.
        rest[0] = 2.0 * rest[1] - rest[2]
        vals = rest
    x = lam * h
    # Cell weights for the left and right node: h*A(x), h*B(x).
    small = x < 1e-3
    xs = np.where(small, 1.0, x)
    em = np.exp(-xs)
    wa = np.where(small, 0.5 - x / 6.0 + x**2 / 24.0, (xs - 1.0 + em) / xs**2)
    wb = np.where(small, 0.5 - x / 3.0 + x**2 / 8.0, (1.0 - (1.0 + xs) * em) / xs**2)
    decay = np.exp(-np.outer(lam, t[:-1]))
    result += h * (decay @ vals[:-1] * wa + decay @ vals[1:] * wb)
    bound = np.abs(f.values[-1]) * np.exp(-lam * f.T) / lam
    return LaplaceResult(lambdas=lam, values=result, truncation_bound=bound)


def gronwall_bound(A: SampledPath, B: float, beta: float) -> SampledPath:
    """Fractional Gronwall-Bellman majorant ``A(t) E_beta(B Gamma(beta) t**beta)``.

    If ``u <= A + B int_0^t (t-s)**(beta-1) u(s) ds`` with ``A`` non-negative
    and non-decreasing, then ``u`` is bounded by the returned path.
    """
    vals = A.values
    if np.any(vals < 0) or np.any(np.diff(vals) < 0):
        raise DomainError("A must be non-negative and non-decreasing")
    if not (math.isfinite(B) and B > 0):
        raise DomainError("B must be positive")
    if not (math.isfinite(beta) and beta > 0):
        raise DomainError("beta must be positive")
    arg = B * math.gamma(beta) * A.t**beta
    return A.with_values(vals * mittag_leffler(beta, 1.0, arg))


@lru_cache(maxsize=32)
def _fode_weights(beta: float, a: float, h: float, n: int) -> ConvolutionWeights:
    return ml_weights(beta, beta, a, h, n)


def solve_linear_fode(a: float, y0: float, f: SampledPath, beta: float) -> SampledPath:
    """Solve ``d^beta y = a y + f`` (Caputo), ``y(0) = y0``, for ``0 < beta <= 1``.

    Uses the explicit solution
    ``y(t) = y0 E_beta(a t**beta) + int_0^t (t-s)**(beta-1) E_{beta,beta}(a (t-s)**beta) f(s) ds``
    with the convolution done by product integration.
    """
    if not (0.0 < beta <= 1.0):
        raise DomainError(f"beta must lie in (0, 1], got {beta!r}")
    if not (math.isfinite(a) and math.isfinite(y0)):
        raise DomainError("a and y0 must be finite")
    if not np.all(np.isfinite(f.values)):
        raise DomainError("forcing must be finite")
    t = f.t
    homogeneous = y0 * ml_y(beta, 1.0, a, t)
    forced = _fode_weights(float(beta), float(a), f.dt, f.n_steps).apply(f.values)
    return f.with_values(homogeneous + forced)
