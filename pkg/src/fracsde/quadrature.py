"""Product-integration weights for convolution integrals on a uniform grid.

For a kernel ``k`` on ``(0, T]`` (possibly singular at 0) and samples
``f_0, ..., f_n`` of a function on ``t_i = i*h``, the integral

    out_i = int_0^{t_i} k(t_i - s) f(s) ds

is approximated by integrating ``k`` exactly against the piecewise-linear
interpolant of ``f``. With the cell moments

    L_m = int_0^h k(m*h + u) (1 - u/h) du,   R_m = int_0^h k(m*h + u) u/h du

this gives the Toeplitz rule ``out_i = sum_{j=1}^{i} w_{i-j} f_j + R_{i-1} f_0``
with ``w_0 = L_0`` and ``w_m = L_m + R_{m-1}``.

Cell 0 carries the singularity. It is integrated from closed-form primitives
when they are available, and otherwise by Gauss-Legendre rules on
geometrically graded subcells plus a power-law correction for the innermost
piece. All other cells use a fixed Gauss-Legendre rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from .special_functions import ml_y, rgamma

Kernel = Callable[[np.ndarray], np.ndarray]

_GL_NODES = 16
_GRADE_RATIO = 0.25
_GRADE_LEVELS = 24
_DIRECT_LIMIT = 512


def _gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class ConvolutionWeights:
    """Toeplitz product-integration rule for ``n`` steps of size ``h``."""

    h: float
    omega: np.ndarray
    edge: np.ndarray

    @property
    def n_steps(self) -> int:
        return self.omega.size

    @classmethod
    def from_moments(cls, h: float, left: np.ndarray, right: np.ndarray) -> "ConvolutionWeights":
        omega = left.copy()
        omega[1:] += right[:-1]
        return cls(h=h, omega=omega, edge=right.copy())

    def apply(self, f) -> np.ndarray:
        """Apply the rule to samples ``f`` of shape ``(..., n+1)``; ``out[..., 0] = 0``."""
        f = np.asarray(f, dtype=float)
        n = self.n_steps
        if f.shape[-1] != n + 1:
            raise ValueError(f"expected {n + 1} samples, got {f.shape[-1]}")
        out = np.zeros(f.shape)
        if n <= _DIRECT_LIMIT and f.ndim == 1:
            conv = np.convolve(self.omega, f[1:])[:n]
        elif n <= _DIRECT_LIMIT:
            conv = f[..., 1:] @ self.matrix()[1:, 1:].T
        else:
            conv = fftconvolve(f[..., 1:], np.broadcast_to(self.omega, f.shape[:-1] + (n,)), axes=-1)[..., :n]
        out[..., 1:] = conv + self.edge * f[..., :1]
        return out

    def matrix(self) -> np.ndarray:
        """Dense lower-triangular ``(n+1, n+1)`` matrix of the rule."""
        n = self.n_steps
        mat = np.zeros((n + 1, n + 1))
        i, j = np.tril_indices(n, 0)
        mat[i + 1, j + 1] = self.omega[i - j]
        mat[1:, 0] = self.edge
        return mat


def _regular_moments(kernel: Kernel, h: float, cells: np.ndarray, nodes: int = _GL_NODES):
    u, w = _gauss_legendre(nodes)
    vals = kernel((cells[:, None] + u[None, :]) * h)
    left = h * vals @ (w * (1.0 - u))
    right = h * vals @ (w * u)
    return left, right


def _graded_first_cell(kernel: Kernel, h: float, exponent: float, nodes: int = _GL_NODES):
    u, w = _gauss_legendre(nodes)
    levels = np.arange(_GRADE_LEVELS)
    lo = h * _GRADE_RATIO ** (levels + 1)
    width = h * _GRADE_RATIO**levels - lo
    x = lo[:, None] + width[:, None] * u[None, :]
    vals = kernel(x.ravel()).reshape(x.shape) * (width[:, None] * w[None, :])
    frac = x / h
    left = np.sum(vals * (1.0 - frac))
    right = np.sum(vals * frac)
    # Innermost piece [0, delta]: kernel ~ c * u**exponent there.
    delta = lo[-1]
    u_ref = 0.5 * delta
    c = float(kernel(np.array([u_ref]))[0]) / u_ref**exponent
    left += c * delta ** (exponent + 1.0) / (exponent + 1.0)
    right += c * delta ** (exponent + 2.0) / ((exponent + 2.0) * h)
    return left, right


def kernel_moments(
    kernel: Kernel,
    h: float,
    n: int,
    exponent: float = 0.0,
    primitives: tuple[Kernel, Kernel] | None = None,
):
    """Cell moments ``(L, R)`` of ``kernel`` on ``n`` cells of width ``h``.

    ``exponent`` is the power-law behaviour ``k(r) ~ r**exponent`` at 0
    (must exceed -1). ``primitives = (P1, P2)`` with ``P1' = k``,
    ``P2' = P1`` and ``P1(0) = P2(0) = 0`` makes cell 0 exact.
    """
    if not exponent > -1.0:
        raise ValueError("kernel must be integrable at 0")
    left = np.empty(n)
    right = np.empty(n)
    if primitives is not None:
        p1, p2 = primitives
        a1 = float(np.atleast_1d(p1(np.array([h])))[0])
        a2 = float(np.atleast_1d(p2(np.array([h])))[0])
        left[0] = a2 / h
        right[0] = a1 - a2 / h
    else:
        left[0], right[0] = _graded_first_cell(kernel, h, exponent)
    if n > 1:
        left[1:], right[1:] = _regular_moments(kernel, h, np.arange(1, n, dtype=float))
    return left, right


def power_kernel(p: float) -> Kernel:
    """``r**(p-1) / Gamma(p)``, the Riemann-Liouville kernel of order ``p``."""
    c = rgamma(p)
    return lambda r: c * np.power(r, p - 1.0)


def power_weights(p: float, h: float, n: int) -> ConvolutionWeights:
    """Weights for the fractional integral of order ``p > 0``."""
    c1 = rgamma(p + 1.0)
    c2 = rgamma(p + 2.0)
    prims = (lambda r: c1 * r**p, lambda r: c2 * r ** (p + 1.0))
    left, right = kernel_moments(power_kernel(p), h, n, p - 1.0, prims)
    return ConvolutionWeights.from_moments(h, left, right)


def ml_kernel(beta: float, rho: float, a: float) -> Kernel:
    """``r**(rho-1) E_{beta,rho}(a r**beta)``."""
    return lambda r: ml_y(beta, rho, a, r)


def ml_weights(beta: float, rho: float, a: float, h: float, n: int) -> ConvolutionWeights:
    """Weights for convolution with ``r**(rho-1) E_{beta,rho}(a r**beta)``.

    Uses the primitives ``y_{beta,rho+1}`` and ``y_{beta,rho+2}``.
    """
    prims = (ml_kernel(beta, rho + 1.0, a), ml_kernel(beta, rho + 2.0, a))
    left, right = kernel_moments(ml_kernel(beta, rho, a), h, n, rho - 1.0, prims)
    return ConvolutionWeights.from_moments(h, left, right)


def squared_ml_weights(beta: float, rho: float, a: float, h: float, n: int) -> ConvolutionWeights:
    """Weights for convolution with the squared kernel ``(r**(rho-1) E_{beta,rho}(a r**beta))**2``."""
    base = ml_kernel(beta, rho, a)
    left, right = kernel_moments(lambda r: base(r) ** 2, h, n, 2.0 * (rho - 1.0))
    return ConvolutionWeights.from_moments(h, left, right)
