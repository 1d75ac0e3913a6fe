"""Wavenumber-wise well-posedness of the fractional stochastic heat-type equation.

After a Fourier transform in space, each mode ``U(t, y)`` solves a scalar
equation of fractional-GBM type with drift ``-b |y|**alpha`` and noise level
``sigma |y|**nu``. Its second moment ``V(t) = E|U(t, y)|**2`` (with
``|U(0, y)| = 1``) satisfies the linear Volterra equation

    V(t) = E_beta(-A t**beta)**2
           + lam int_0^t Phi_A(t - s)**2 V(s) ds,   A = b |y|**alpha, lam = sigma**2 |y|**(2 nu),

with ``Phi_A(r) = r**(beta-gamma) E_{beta, beta-gamma+1}(-A r**beta)``. The equation
is well posed in ``L2`` when ``V`` is bounded uniformly in ``y``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ClassicalSolutionError, DomainError, check_classical
from .fou_analysis import fou_limit_variance
from .frac_calculus import SampledPath, gronwall_bound
from .quadrature import squared_ml_weights
from .special_functions import ml_y, rgamma
from .volterra_sim import GridSpec

BLOWUP_LEVEL = 1e30


@dataclass(frozen=True)
class SpdeParams:
    beta: float
    gamma: float
    alpha: float
    nu: float
    b: float
    sigma: float

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0 and 0.0 < self.gamma <= 1.0):
            raise DomainError("beta and gamma must lie in (0, 1]")
        if not (0.0 < self.alpha <= 2.0 and 0.0 < self.nu <= 2.0):
            raise DomainError("alpha and nu must lie in (0, 2]")
        if not (math.isfinite(self.b) and self.b > 0):
            raise DomainError("b must be positive")
        if not math.isfinite(self.sigma):
            raise DomainError("sigma must be finite")

    @property
    def epsilon(self) -> float:
        """``(gamma - 1/2) / beta``; meaningful for ``gamma > 1/2``."""
        return (self.gamma - 0.5) / self.beta

    @property
    def critical_alpha(self) -> float:
        """``nu / (1 - epsilon)``, the smoothing order needed when ``gamma > 1/2``."""
        return self.nu / (1.0 - self.epsilon)


class VerdictTag(str, enum.Enum):
    WELL_POSED = "WellPosed"
    NOT_WELL_POSED = "NotWellPosed"
    WELL_POSED_AT_THRESHOLD = "WellPosedAtThreshold"
    UNKNOWN = "Unknown"
    NO_CLASSICAL_SOLUTION = "NoClassicalSolution"


@dataclass(frozen=True)
class Verdict:
    tag: VerdictTag
    reason: str


def threshold_coefficient(beta: float, gamma: float) -> float:
    """``C(beta, gamma) = sigma_inf**2(1, beta, gamma) ** (1 / (2 - 2 eps))``.

    At ``alpha = nu / (1 - eps)`` the equation is well posed whenever
    ``b >= C * |sigma| ** (1 / (1 - eps))``.
    """
    if not (0.0 < beta <= 1.0 and 0.5 < gamma <= 1.0):
        raise DomainError("threshold needs beta in (0, 1] and gamma in (1/2, 1]")
    eps = (gamma - 0.5) / beta
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps = (gamma - 1/2)/beta must lie in (0, 1), got {eps:g}")
    return fou_limit_variance(1.0, beta, gamma) ** (1.0 / (2.0 - 2.0 * eps))


def classify(p: SpdeParams, tol: float = 0.0) -> Verdict:
    """Well-posedness verdict in ``L2``.

    Comparisons ``gamma = 1/2`` and ``alpha = nu / (1 - eps)`` are exact unless
    ``tol > 0``, in which case inputs within ``tol`` snap onto the boundary.
    """
    if not (tol >= 0):
        raise DomainError("tol must be non-negative")
    beta, gamma, alpha, nu = p.beta, p.gamma, p.alpha, p.nu
    if beta - gamma <= -0.5:
        return Verdict(
            VerdictTag.NO_CLASSICAL_SOLUTION,
            "beta - gamma <= -1/2: the kernel is not square integrable, only a generalized chaos solution exists",
        )
    if tol > 0 and abs(gamma - 0.5) <= tol:
        gamma = 0.5
    if gamma < 0.5:
        if alpha >= nu:
            return Verdict(VerdictTag.WELL_POSED, "gamma < 1/2 and alpha >= nu: Gronwall bound uniform in y")
        return Verdict(
            VerdictTag.NOT_WELL_POSED,
            "gamma < 1/2 and alpha < nu: the condition alpha >= nu is necessary, high modes grow",
        )
    if gamma == 0.5:
        if alpha > nu:
            return Verdict(VerdictTag.WELL_POSED, "gamma = 1/2 and alpha > nu: Gronwall bound uniform in y")
        if alpha == nu:
            return Verdict(
                VerdictTag.NOT_WELL_POSED, "gamma = 1/2 and alpha = nu: logarithmic kernel mass, high modes grow"
            )
        return Verdict(VerdictTag.NOT_WELL_POSED, "gamma = 1/2 and alpha < nu: well posed only if alpha > nu")
    eps = (gamma - 0.5) / beta
    critical = nu / (1.0 - eps)
    if tol > 0 and abs(alpha - critical) <= tol:
        alpha = critical
    if alpha > critical:
        return Verdict(
            VerdictTag.WELL_POSED, f"gamma > 1/2 and alpha > nu/(1 - eps) = {critical:.6g}: Gronwall bound uniform in y"
        )
    if alpha == critical:
        coef = threshold_coefficient(beta, gamma)
        needed = coef * abs(p.sigma) ** (1.0 / (1.0 - eps))
        if p.b >= needed:
            return Verdict(
                VerdictTag.WELL_POSED_AT_THRESHOLD,
                f"alpha = nu/(1 - eps) and b >= {needed:.6g} (sufficient condition on b met)",
            )
        return Verdict(
            VerdictTag.UNKNOWN,
            f"alpha = nu/(1 - eps) but b < {needed:.6g}: sufficient condition not met, no negative result known",
        )
    return Verdict(
        VerdictTag.UNKNOWN,
        f"gamma > 1/2 and alpha < nu/(1 - eps) = {critical:.6g}: no result either way; "
        "a generalized chaos solution is unlikely when nu > alpha",
    )


def second_moment_volterra(p: SpdeParams, y_mag: float, grid: GridSpec) -> SampledPath:
    """``V(t) = E|U(t, y)|**2`` for ``|U(0, y)| = 1`` by implicit product-integration stepping.

    Once ``V`` exceeds ``BLOWUP_LEVEL`` the rest of the path is set to ``inf``.
    """
    check_classical(p.beta, p.gamma, "the second moment equation")
    if not (math.isfinite(y_mag) and y_mag > 0):
        raise DomainError("|y| must be positive")
    A = p.b * y_mag**p.alpha
    lam = p.sigma**2 * y_mag ** (2.0 * p.nu)
    rho = p.beta - p.gamma + 1.0
    n = grid.n_steps
    e0 = ml_y(p.beta, 1.0, -A, grid.t) ** 2
    if lam == 0:
        return SampledPath(grid.T, e0)
    w = squared_ml_weights(p.beta, rho, -A, grid.dt, n)
    omega = w.omega
    v = np.empty(n + 1)
    v[0] = e0[0]
    diag = 1.0 - lam * omega[0]
    for i in range(1, n + 1):
        hist = omega[i - 1 : 0 : -1] @ v[1:i] + w.edge[i - 1] * v[0]
        val = (e0[i] + lam * hist) / diag if diag > 0 else math.inf
        if not (val <= BLOWUP_LEVEL):
            v[i:] = math.inf
            break
        v[i] = val
    return SampledPath(grid.T, v)


def growth_probe(p: SpdeParams, y_list: Iterable[float], grid: GridSpec) -> list[tuple[float, float]]:
    """``(|y|, V(T)/V(0))`` for each wavenumber magnitude."""
    out = []
    for y in y_list:
        v = second_moment_volterra(p, float(y), grid).values
        out.append((float(y), float(v[-1] / v[0])))
    return out


def gronwall_envelope(p: SpdeParams, y_mag: float, grid: GridSpec) -> SampledPath:
    """Majorant of ``V`` from the fractional Gronwall inequality.

    Uses ``E_beta(-x)**2 <= 1`` and ``Phi_A(r)**2 <= r**(r0-1) / Gamma(rho)**2`` with
    ``r0 = 2(beta-gamma)+1``, both valid because the Mittag-Leffler factors are
    completely monotone on the negative axis.
    """
    check_classical(p.beta, p.gamma, "the second moment equation")
    rho = p.beta - p.gamma + 1.0
    lam = p.sigma**2 * y_mag ** (2.0 * p.nu)
    r0 = 2.0 * (p.beta - p.gamma) + 1.0
    ones = SampledPath.constant(1.0, grid.T, grid.n_steps)
    if lam == 0:
        return ones
    return gronwall_bound(ones, lam * rgamma(rho) ** 2, r0)


@dataclass(frozen=True)
class SweepRow:
    params: SpdeParams
    verdict: Verdict

    def as_record(self) -> dict:
        p = self.params
        return {
            "beta": p.beta,
            "gamma": p.gamma,
            "alpha": p.alpha,
            "nu": p.nu,
            "b": p.b,
            "sigma": p.sigma,
            "verdict": self.verdict.tag.value,
            "reason": self.verdict.reason,
        }


SWEEP_HEADER = ("beta", "gamma", "alpha", "nu", "b", "sigma", "verdict", "reason")


def sweep(
    betas: Sequence[float],
    gammas: Sequence[float],
    alphas: Sequence[float],
    nus: Sequence[float],
    bs: Sequence[float],
    sigmas: Sequence[float],
    tol: float = 0.0,
) -> list[SweepRow]:
    """Classify every combination of the given parameter values (row-major order)."""
    rows = []
    for beta in betas:
        for gamma in gammas:
            for alpha in alphas:
                for nu in nus:
                    for b in bs:
                        for sigma in sigmas:
                            p = SpdeParams(beta, gamma, alpha, nu, b, sigma)
                            rows.append(SweepRow(p, classify(p, tol)))
    return rows
