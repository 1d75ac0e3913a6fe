"""Monte Carlo simulation of Brownian motion and Gaussian Volterra processes.

A Gaussian Volterra process here is ``V(t) = int_0^t k(t - s) dw(s)`` for a
convolution kernel ``k`` that is square integrable near 0. Two samplers are
available:

* ``IncrementQuadrature`` replaces ``k`` on each cell by its exact average and
  sums against Brownian increments (an FFT convolution per path block).
* ``CovarianceFactor`` builds the exact covariance matrix on the grid and
  samples through its Cholesky factor.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, FactorizationError, check_classical
from .frac_calculus import SampledPath
from .quadrature import kernel_moments
from .rng import map_path_chunks, standard_normals
from .special_functions import ml_y, rgamma


@dataclass(frozen=True)
class GridSpec:
    T: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.T) and self.T > 0):
            raise DomainError(f"T must be positive and finite, got {self.T!r}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 2:
            raise DomainError(f"n_steps must be an integer >= 2, got {self.n_steps!r}")

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_steps + 1)


@dataclass(frozen=True)
class PowerKernel:
    """``k(r) = scale * r**exponent`` with ``exponent > -1/2``."""

    scale: float
    exponent: float

    def __post_init__(self):
        if not (math.isfinite(self.scale) and math.isfinite(self.exponent)):
            raise DomainError("kernel parameters must be finite")
        if not self.exponent > -0.5:
            raise DomainError(
                f"power kernel exponent must exceed -1/2 for square integrability, got {self.exponent!r}"
            )

    @classmethod
    def noise_derivative(cls, gamma: float) -> "PowerKernel":
        """Kernel of the fractional derivative of order ``gamma`` of Brownian motion."""
        return cls(rgamma(1.0 - gamma), -gamma)

    @classmethod
    def noise_integral(cls, gamma: float) -> "PowerKernel":
        """Kernel of the fractional integral of order ``1 - gamma`` of Brownian motion."""
        return cls(1.0 / ((1.0 - gamma) * math.gamma(1.0 - gamma)), 1.0 - gamma)

    @classmethod
    def fsode(cls, beta: float, gamma: float) -> "PowerKernel":
        """Kernel of the solution of the noise-driven equation with zero drift."""
        check_classical(beta, gamma)
        return cls(rgamma(1.0 + beta - gamma), beta - gamma)

    def __call__(self, r):
        return self.scale * np.power(r, self.exponent)

    def primitive(self, r):
        return self.scale * np.power(r, self.exponent + 1.0) / (self.exponent + 1.0)

    def square_integral(self, t):
        """``int_0^t k(r)**2 dr``, the variance of ``V(t)``."""
        e2 = 2.0 * self.exponent + 1.0
        return self.scale**2 * np.power(t, e2) / e2


@dataclass(frozen=True)
class FouKernel:
    """``k(r) = r**(beta-gamma) E_{beta, beta-gamma+1}(-a r**beta)``."""

    a: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0 and 0.0 < self.gamma <= 1.0):
            raise DomainError("beta and gamma must lie in (0, 1]")
        if not math.isfinite(self.a):
            raise DomainError("a must be finite")
        check_classical(self.beta, self.gamma)

    @property
    def exponent(self) -> float:
        return self.beta - self.gamma

    @property
    def rho(self) -> float:
        return self.beta - self.gamma + 1.0

    def __call__(self, r):
        return ml_y(self.beta, self.rho, -self.a, r)

    def primitive(self, r):
        return ml_y(self.beta, self.rho + 1.0, -self.a, r)


KernelSpec = Union[PowerKernel, FouKernel]


class Method(str, enum.Enum):
    INCREMENT_QUADRATURE = "IncrementQuadrature"
    COVARIANCE_FACTOR = "CovarianceFactor"


@dataclass(frozen=True)
class PathEnsemble:
    """``n_paths`` realizations on a grid; row ``p`` is path ``p``."""

    grid: GridSpec
    n_paths: int
    data: np.ndarray = field(repr=False)
    seed: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.shape != (self.n_paths, self.grid.n_steps + 1):
            raise DomainError(f"data shape {data.shape} does not match the grid and path count")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def t(self) -> np.ndarray:
        return self.grid.t

    def path(self, index: int) -> SampledPath:
        return SampledPath(self.grid.T, self.data[index])


@dataclass(frozen=True)
class Moments:
    mean: SampledPath
    variance: SampledPath
    mean_se: np.ndarray
    variance_se: np.ndarray


def _check_paths(n_paths: int) -> None:
    if int(n_paths) != n_paths or n_paths < 1:
        raise DomainError(f"n_paths must be a positive integer, got {n_paths!r}")


def _increments(seed: int, first: int, count: int, grid: GridSpec) -> np.ndarray:
    return math.sqrt(grid.dt) * standard_normals(seed, count, grid.n_steps, first_path=first)


def simulate_bm(grid: GridSpec, n_paths: int, seed: int = 0, jobs: int | None = None) -> PathEnsemble:
    """Brownian motion from cumulative Gaussian increments."""
    _check_paths(n_paths)

    def work(first, count):
        out = np.zeros((count, grid.n_steps + 1))
        np.cumsum(_increments(seed, first, count, grid), axis=1, out=out[:, 1:])
        return out

    return PathEnsemble(grid, n_paths, map_path_chunks(work, n_paths, jobs), seed)


def increment_weights(kernel: KernelSpec, grid: GridSpec) -> np.ndarray:
    """Weights ``w_m`` with ``V(t_i) = sum_j w_{i-1-j} dW_j``.

    ``w_m`` is the mean of ``k`` over ``[m dt, (m+1) dt]``. For a kernel that is
    singular at 0 the first weight is instead the root mean square over the
    cell, which keeps the variance contribution of the diagonal cell exact.
    """
    return _increment_weights(kernel, grid.T, grid.n_steps)


@lru_cache(maxsize=16)
def _increment_weights(kernel: KernelSpec, T: float, n: int) -> np.ndarray:
    h = T / n
    edges = np.arange(n + 1) * h
    prim = np.asarray(kernel.primitive(edges), dtype=float)
    prim[0] = 0.0
    w = np.diff(prim) / h
    if kernel.exponent < 0:
        left, right = kernel_moments(lambda r: kernel(r) ** 2, h, 1, 2.0 * kernel.exponent)
        w[0] = math.copysign(math.sqrt((left[0] + right[0]) / h), w[0])
    return w


def _covariance(kernel: KernelSpec, grid: GridSpec) -> np.ndarray:
    """Covariance ``C[i, j] = int_0^{min(t_i, t_j)} k(t_i - s) k(t_j - s) ds`` for nodes 1..n."""
    n = grid.n_steps
    h = grid.dt
    x, w = np.polynomial.legendre.leggauss(16)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    # Lag l >= 1 cells use a plain Gauss rule; the l = 0 cell touches the singularity.
    q = np.arange(2 * n)[:, None] + x[None, :]
    kv = kernel(q * h)
    acc = np.zeros((n, n))  # acc[m, l] = int over cell l of k((m + l) h + u) k(l h + u) du
    for lag in range(1, n):
        acc[:, lag] = h * (kv[lag : lag + n] * kv[lag]) @ w
    acc[:, 0] = _first_cell_products(kernel, h, n)
    cum = np.cumsum(acc, axis=1)
    i, j = np.tril_indices(n)
    cov = np.zeros((n, n))
    cov[i, j] = cum[i - j, j]
    cov[j, i] = cov[i, j]
    return cov


def _first_cell_products(kernel: KernelSpec, h: float, n: int) -> np.ndarray:
    """``int_0^h k(m h + u) k(u) du`` for ``m = 0 .. n-1`` on a graded mesh."""
    x, w = np.polynomial.legendre.leggauss(16)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    ratio, levels = 0.25, 24
    lo = h * ratio ** (np.arange(levels) + 1)
    width = h * ratio ** np.arange(levels) - lo
    u = (lo[:, None] + width[:, None] * x).ravel()
    wu = (width[:, None] * w).ravel()
    ku = kernel(u)
    m = np.arange(n)[:, None] * h
    out = (kernel(m + u[None, :]) * (ku * wu)).sum(axis=1) if n > 0 else np.zeros(0)
    # Innermost piece [0, delta] with k(u) ~ c u**e.
    delta = lo[-1]
    e = kernel.exponent
    c = float(kernel(np.array([0.5 * delta]))[0]) / (0.5 * delta) ** e
    out[0] += c * c * delta ** (2 * e + 1) / (2 * e + 1)
    if n > 1:
        out[1:] += kernel(m[1:, 0]) * c * delta ** (e + 1) / (e + 1)
    return out


def covariance_factor(kernel: KernelSpec, grid: GridSpec) -> np.ndarray:
    """Lower Cholesky factor of the grid covariance, with one jitter retry."""
    return _covariance_factor(kernel, grid)


@lru_cache(maxsize=8)
def _covariance_factor(kernel: KernelSpec, grid: GridSpec) -> np.ndarray:
    cov = _covariance(kernel, grid)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-12 * float(np.max(np.diag(cov)))
    try:
        return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
    except np.linalg.LinAlgError:
        raise FactorizationError(
            "covariance matrix is not positive definite after jitter",
            float(np.linalg.eigvalsh(cov)[0]),
        ) from None


def simulate_volterra(
    kernel: KernelSpec,
    grid: GridSpec,
    n_paths: int,
    seed: int = 0,
    method: Method | str = Method.INCREMENT_QUADRATURE,
    jobs: int | None = None,
) -> PathEnsemble:
    """Sample ``V(t) = int_0^t k(t - s) dw(s)`` on the grid (``V(0) = 0``)."""
    _check_paths(n_paths)
    method = Method(method)
    n = grid.n_steps
    if method is Method.INCREMENT_QUADRATURE:
        weights = increment_weights(kernel, grid)

        def work(first, count):
            dw = _increments(seed, first, count, grid)
            out = np.zeros((count, n + 1))
            out[:, 1:] = fftconvolve(dw, weights[None, :], axes=1)[:, :n]
            return out

    else:
        factor = covariance_factor(kernel, grid)

        def work(first, count):
            z = standard_normals(seed, count, n, first_path=first)
            out = np.zeros((count, n + 1))
            out[:, 1:] = z @ factor.T
            return out

    return PathEnsemble(grid, n_paths, map_path_chunks(work, n_paths, jobs), seed)


@dataclass(frozen=True)
class FouParams:
    """Fractional Ornstein-Uhlenbeck parameters: ``d^beta X = -a X + d^gamma w'``."""

    X0: float
    a: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0 and 0.0 < self.gamma <= 1.0):
            raise DomainError("beta and gamma must lie in (0, 1]")
        if not (math.isfinite(self.X0) and math.isfinite(self.a)):
            raise DomainError("X0 and a must be finite")


def simulate_fou(
    params: FouParams,
    grid: GridSpec,
    n_paths: int,
    seed: int = 0,
    method: Method | str = Method.INCREMENT_QUADRATURE,
    jobs: int | None = None,
) -> PathEnsemble:
    """Fractional OU paths: deterministic mean plus the Volterra part with the Mittag-Leffler kernel."""
    check_classical(params.beta, params.gamma, "the fractional OU process")
    kernel = FouKernel(params.a, params.beta, params.gamma)
    noise = simulate_volterra(kernel, grid, n_paths, seed, method, jobs)
    mean = params.X0 * ml_y(params.beta, 1.0, -params.a, grid.t)
    return PathEnsemble(grid, n_paths, noise.data + mean, seed)


def simulate_fgbm(
    X0: float,
    a: float,
    sigma: float,
    beta: float,
    gamma: float,
    grid: GridSpec,
    n_paths: int,
    seed: int = 0,
    jobs: int | None = None,
) -> PathEnsemble:
    """Paths of ``X(t) = X0 E_beta(a t**beta) + sigma int_0^t Phi(t-s) X(s) dw(s)``.

    ``Phi(r) = r**(beta-gamma) E_{beta, beta-gamma+1}(a r**beta)``. The stochastic
    integral is evaluated with left-point (Ito) values of ``X`` and the cell
    weights of :func:`increment_weights`; this carries an O(dt) bias.
    """
    _check_paths(n_paths)
    kernel = FouKernel(-a, beta, gamma)
    weights = increment_weights(kernel, grid)
    mean = X0 * ml_y(beta, 1.0, a, grid.t)
    n = grid.n_steps

    def work(first, count):
        dw = _increments(seed, first, count, grid)
        x = np.empty((count, n + 1))
        x[:, 0] = X0
        for i in range(1, n + 1):
            x[:, i] = mean[i] + sigma * (x[:, :i] * dw[:, :i]) @ weights[i - 1 :: -1]
        return x

    return PathEnsemble(grid, n_paths, map_path_chunks(work, n_paths, jobs), seed)


def empirical_moments(ens: PathEnsemble) -> Moments:
    """Per-node sample mean, unbiased variance and their standard errors.

    The variance standard error uses ``sqrt((m4 - s**4) / n)`` with the fourth
    central moment ``m4``.
    """
    n = ens.n_paths
    if n < 2:
        raise DomainError("empirical moments need at least two paths")
    data = ens.data
    mean = data.mean(axis=0)
    dev = data - mean
    var = (dev**2).sum(axis=0) / (n - 1)
    m4 = (dev**4).mean(axis=0)
    mean_se = np.sqrt(var / n)
    var_se = np.sqrt(np.maximum(m4 - var**2, 0.0) / n)
    T = ens.grid.T
    return Moments(SampledPath(T, mean), SampledPath(T, var), mean_se, var_se)
