"""Chaos expansions over the cosine basis of ``L2(0, T)``.

Covers the basis and its integrals, probabilists' Hermite polynomials,
first-order coefficients of fractionally integrated white noise, weighted
(``q``-) norms, and the fractional geometric Brownian motion:

* its second moment through the layer recursion
  ``M_0(t) = E_beta(a t**beta)**2``, ``M_n = int_0^t Phi(t-s)**2 M_{n-1}(s) ds``;
* its full coefficient table (the propagator) over multi-indices.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

from .errors import ConvergenceError, DomainError, NumericalError, check_classical
from .frac_calculus import SampledPath
from .quadrature import ConvolutionWeights, ml_weights, power_weights, squared_ml_weights
from .special_functions import log_abs_gamma, mittag_leffler, ml_y, rgamma
from .volterra_sim import GridSpec

DEFAULT_MAX_ENTRIES = 200_000


# ---------------------------------------------------------------------------
# Basis, Hermite polynomials and first-order coefficients


def _check_mode(k: int) -> None:
    if int(k) != k or k < 1:
        raise DomainError(f"mode index must be an integer >= 1, got {k!r}")


def _check_time(t, T: float) -> np.ndarray:
    if not (math.isfinite(T) and T > 0):
        raise DomainError("T must be positive")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > T):
        raise DomainError("t must lie in [0, T]")
    return t_arr


def cosine_basis_eval(k: int, t, T: float):
    """``m_1 = 1/sqrt(T)``, ``m_k = sqrt(2/T) cos(pi (k-1) t / T)``."""
    _check_mode(k)
    t_arr = _check_time(t, T)
    if k == 1:
        out = np.full(t_arr.shape, 1.0 / math.sqrt(T))
    else:
        out = math.sqrt(2.0 / T) * np.cos(math.pi * (k - 1) * t_arr / T)
    return float(out) if out.ndim == 0 else out


def bm_chaos_coeff(k: int, t, T: float):
    """``int_0^t m_k(s) ds`` in closed form."""
    _check_mode(k)
    t_arr = _check_time(t, T)
    if k == 1:
        out = t_arr / math.sqrt(T)
    else:
        w = math.pi * (k - 1) / T
        out = math.sqrt(2.0 / T) * np.sin(w * t_arr) / w
    return float(out) if out.ndim == 0 else out


def hermite_eval(n: int, x):
    """Probabilists' Hermite polynomial ``He_n(x)`` by the three-term recurrence."""
    if int(n) != n or n < 0:
        raise DomainError(f"degree must be a non-negative integer, got {n!r}")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return float(prev) if prev.ndim == 0 else prev
    cur = x.copy()
    for j in range(1, n):
        prev, cur = cur, x * cur - j * prev
    return float(cur) if cur.ndim == 0 else cur


def _steps_for_mode(k: int) -> int:
    # About 64 nodes per half period of the cosine, rounded up to a power of two.
    return max(1024, 1 << math.ceil(math.log2(64 * k)))


@lru_cache(maxsize=32)
def _weights(order: float, h: float, n: int) -> ConvolutionWeights:
    return power_weights(order, h, n)


def genproc_path(k: int, T: float, beta: float, gamma: float, n_steps: int | None = None) -> SampledPath:
    """``I^(1+beta-gamma) m_k`` on ``[0, T]`` by product integration."""
    _check_mode(k)
    _check_orders(beta, gamma)
    n = n_steps or _steps_for_mode(k)
    t = np.linspace(0.0, T, n + 1)
    vals = _weights(1.0 + beta - gamma, T / n, n).apply(cosine_basis_eval(k, t, T))
    return SampledPath(T, vals)


def genproc_coeff(k: int, t: float, T: float, beta: float, gamma: float) -> float:
    """First-order chaos coefficient ``I^(1+beta-gamma) m_k(t)`` of the generalized process."""
    _check_mode(k)
    _check_orders(beta, gamma)
    t = float(_check_time(t, T))
    if t == 0:
        return 0.0
    n = _steps_for_mode(max(k, math.ceil(k * t / T)))
    w = _weights(1.0 + beta - gamma, t / n, n)
    f = cosine_basis_eval(k, np.linspace(0.0, t, n + 1), T)
    return float(w.omega[::-1] @ f[1:] + w.edge[-1] * f[0])


def _check_orders(beta: float, gamma: float) -> None:
    if not (0.0 < beta <= 1.0 and 0.0 < gamma <= 1.0):
        raise DomainError(f"beta and gamma must lie in (0, 1], got beta={beta!r}, gamma={gamma!r}")


# ---------------------------------------------------------------------------
# Multi-indices and weights


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Finitely supported multiplicities; ``entries`` is a sorted tuple of ``(k, alpha_k)``."""

    entries: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        items = tuple(sorted((int(k), int(m)) for k, m in self.entries))
        for k, m in items:
            if k < 1 or m < 1:
                raise DomainError("multi-index entries need k >= 1 and multiplicity >= 1")
        if len({k for k, _ in items}) != len(items):
            raise DomainError("duplicate mode in multi-index")
        object.__setattr__(self, "entries", items)

    @classmethod
    def from_modes(cls, modes: Iterable[int]) -> "MultiIndex":
        """Build from a multiset of modes, e.g. ``(1, 1, 3)``."""
        counts: dict[int, int] = {}
        for k in modes:
            counts[k] = counts.get(k, 0) + 1
        return cls(tuple(counts.items()))

    @property
    def order(self) -> int:
        return sum(m for _, m in self.entries)

    def modes(self) -> tuple[int, ...]:
        return tuple(k for k, m in self.entries for _ in range(m))

    def as_dict(self) -> dict[int, int]:
        return dict(self.entries)

    def weight(self, q: "WeightSequence") -> float:
        return math.prod(q(k) ** m for k, m in self.entries)


@dataclass(frozen=True)
class WeightSequence:
    """Weights ``q_k = c * k**(-p)``, or an explicit finite list ``q_1, q_2, ...``."""

    c: float = 0.5
    p: float = 0.0
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.values is not None:
            vals = tuple(float(v) for v in self.values)
            if not vals or any(not (0.0 < v < 1.0) for v in vals):
                raise DomainError("explicit weights must satisfy 0 < q_k < 1")
            object.__setattr__(self, "values", vals)
            return
        if not (0.0 < self.c < 1.0 and self.p >= 0.0):
            raise DomainError("weights c * k**(-p) need 0 < c < 1 and p >= 0 so that 0 < q_k < 1")

    @classmethod
    def power(cls, p: float, c: float = 0.5) -> "WeightSequence":
        return cls(c=c, p=p)

    def __call__(self, k):
        k_arr = np.asarray(k)
        if np.any(k_arr < 1):
            raise DomainError("weights are indexed from k = 1")
        if self.values is not None:
            if np.any(k_arr > len(self.values)):
                raise DomainError(f"explicit weight list has only {len(self.values)} entries")
            out = np.asarray(self.values)[k_arr - 1]
        else:
            out = self.c * np.power(k_arr.astype(float), -self.p)
        return float(out) if out.ndim == 0 else out


def _norm_sq(x) -> float:
    if isinstance(x, SampledPath):
        v = x.values
        return float(np.trapezoid(v * v, dx=x.dt))
    return float(np.abs(x) ** 2)


def weighted_norm(coeffs: Mapping, q: WeightSequence) -> float:
    """``(sum_alpha q^alpha ||x_alpha||**2) ** 0.5``.

    Keys are mode indices ``k`` (weight ``q_k``) or :class:`MultiIndex`
    (weight ``prod q_k**alpha_k``). Values are scalars (absolute value) or
    :class:`SampledPath` (``L2(0, T)`` norm).
    """
    total = 0.0
    for key, x in coeffs.items():
        w = key.weight(q) if isinstance(key, MultiIndex) else q(int(key))
        total += w * _norm_sq(x)
    return math.sqrt(total)


# ---------------------------------------------------------------------------
# Fractional GBM


@dataclass(frozen=True)
class GbmParams:
    """``d^beta X = a X + sigma d^gamma int_0^t X dw``, ``X(0) = X0``."""

    X0: float
    a: float
    sigma: float
    beta: float
    gamma: float

    def __post_init__(self):
        _check_orders(self.beta, self.gamma)
        if not all(math.isfinite(v) for v in (self.X0, self.a, self.sigma)):
            raise DomainError("X0, a and sigma must be finite")

    @property
    def rho(self) -> float:
        return 1.0 + self.beta - self.gamma

    @property
    def r(self) -> float:
        return 2.0 * (self.beta - self.gamma) + 1.0


@dataclass(frozen=True)
class SecondMoment:
    path: SampledPath
    layers: int
    layer_values: np.ndarray = field(repr=False)


def gbm_second_moment_path(
    p: GbmParams, T: float, tol: float = 1e-12, n_steps: int = 1024, max_layers: int = 200
) -> SecondMoment:
    """``E X(t)**2`` on ``[0, T]`` from the layer recursion.

    Layers are added until the a-priori bound
    ``sigma**(2n) sup M_0 (C T**r)**n / Gamma(n r + 1)`` drops below
    ``tol`` times the accumulated sum, with
    ``C = sup_t Gamma(r+1) M[1](t) / t**r`` and ``M[1] = int_0^t Phi**2``.
    """
    check_classical(p.beta, p.gamma, "the second moment series")
    if not (tol > 0):
        raise DomainError("tol must be positive")
    grid = GridSpec(T, n_steps)
    t = grid.t
    m0 = ml_y(p.beta, 1.0, p.a, t) ** 2
    w = squared_ml_weights(p.beta, p.rho, p.a, grid.dt, n_steps)
    r = p.r
    one = w.apply(np.ones(n_steps + 1))
    c_est = float(np.max(one[1:] / t[1:] ** r)) * math.gamma(r + 1.0)
    sup_m0 = float(np.max(m0))
    s2 = p.sigma**2
    total = m0.copy()
    layer = m0
    layers = [float(m0[-1])]
    if s2 == 0:
        return SecondMoment(SampledPath(T, p.X0**2 * total), 0, np.array(layers))
    for n in range(1, max_layers + 1):
        layer = w.apply(layer)
        contrib = s2**n * layer
        total = total + contrib
        layers.append(float(contrib[-1]))
        if not np.all(np.isfinite(total)):
            raise NumericalError("second-moment series overflowed")
        log_bound = n * math.log(s2 * c_est * T**r) + math.log(sup_m0) - float(log_abs_gamma(n * r + 1.0))
        if log_bound < math.log(tol) + math.log(float(np.max(total))):
            return SecondMoment(SampledPath(T, p.X0**2 * total), n, np.array(layers))
    raise ConvergenceError(f"second-moment series did not reach tol={tol:g} within {max_layers} layers")


def gbm_second_moment(p: GbmParams, t: float, tol: float = 1e-12, n_steps: int = 1024) -> float:
    """``E X(t)**2`` of the fractional GBM at time ``t > 0``."""
    if not (math.isfinite(t) and t > 0):
        raise DomainError("t must be positive")
    return float(gbm_second_moment_path(p, t, tol, n_steps).path.values[-1])


def driftless_second_moment(p: GbmParams, t: float) -> float:
    """Closed form ``X0**2 E_r(sigma**2 Gamma(r) t**r / Gamma(1+beta-gamma)**2)`` valid for ``a = 0``."""
    check_classical(p.beta, p.gamma, "the second moment series")
    if p.a != 0:
        raise DomainError("closed form requires a = 0")
    r = p.r
    arg = p.sigma**2 * math.gamma(r) * t**r * rgamma(p.rho) ** 2
    return p.X0**2 * float(mittag_leffler(r, 1.0, arg))


# ---------------------------------------------------------------------------
# Propagator


@dataclass
class ChaosTable:
    """Coefficients ``X_alpha`` on a grid for every ``|alpha| <= N`` over modes ``1..K``.

    ``indices[i]`` labels row ``i`` of ``values``; rows are in graded
    lexicographic order.
    """

    T: float
    K: int
    N: int
    indices: list[MultiIndex]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self._lookup = {alpha: i for i, alpha in enumerate(self.indices)}

    def __len__(self) -> int:
        return len(self.indices)

    def coefficient(self, alpha: MultiIndex) -> SampledPath:
        return SampledPath(self.T, self.values[self._lookup[alpha]])

    def orders(self) -> np.ndarray:
        return np.array([alpha.order for alpha in self.indices])

    def partial_second_moment(self, K: int | None = None, N: int | None = None, node: int = -1) -> float:
        """``sum X_alpha(t)**2`` over ``|alpha| <= N`` with modes ``<= K`` at grid node ``node``."""
        K = self.K if K is None else K
        N = self.N if N is None else N
        mask = np.array([a.order <= N and all(k <= K for k, _ in a.entries) for a in self.indices])
        return float(np.sum(self.values[mask, node] ** 2))

    def weighted_norm(self, q: WeightSequence, node: int = -1) -> float:
        weights = np.array([alpha.weight(q) for alpha in self.indices])
        return math.sqrt(float(weights @ self.values[:, node] ** 2))

    def to_json(self) -> str:
        entries = [
            {"alpha": [list(e) for e in alpha.entries], "values": [float(v) for v in row]}
            for alpha, row in zip(self.indices, self.values)
        ]
        return json.dumps({"T": self.T, "K": self.K, "N": self.N, "entries": entries})

    @classmethod
    def from_json(cls, text: str) -> "ChaosTable":
        obj = json.loads(text)
        indices = [MultiIndex(tuple(tuple(e) for e in ent["alpha"])) for ent in obj["entries"]]
        values = np.array([ent["values"] for ent in obj["entries"]], dtype=float)
        return cls(float(obj["T"]), int(obj["K"]), int(obj["N"]), indices, values)


def table_size(K: int, N: int) -> int:
    """Number of multi-indices with ``|alpha| <= N`` over ``K`` modes."""
    return math.comb(K + N, N)


def _apply_chunked(w: ConvolutionWeights, f: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.empty_like(f)
    for s in range(0, f.shape[0], chunk):
        out[s : s + chunk] = w.apply(f[s : s + chunk])
    return out


def gbm_propagator(
    p: GbmParams, K: int, N: int, grid: GridSpec, max_entries: int = DEFAULT_MAX_ENTRIES
) -> ChaosTable:
    """Chaos coefficients of the fractional GBM for ``|alpha| <= N`` over modes ``1..K``.

    Order by order,
    ``X_alpha = sigma sum_k sqrt(alpha_k) int_0^t Phi(t-s) X_{alpha - e_k}(s) m_k(s) ds``
    with ``X_() = X0 E_beta(a t**beta)``. Works for every ``beta, gamma`` in ``(0, 1]``.
    """
    if int(K) != K or K < 1 or int(N) != N or N < 0:
        raise DomainError("K must be >= 1 and N >= 0")
    size = table_size(K, N)
    if size > max_entries:
        raise DomainError(f"chaos table would hold {size} entries, above the limit {max_entries}")
    t = grid.t
    n = grid.n_steps
    w = ml_weights(p.beta, p.rho, p.a, grid.dt, n)
    basis = np.array([cosine_basis_eval(k, t, grid.T) for k in range(1, K + 1)])
    indices = [MultiIndex()]
    blocks = [(p.X0 * ml_y(p.beta, 1.0, p.a, t))[None, :]]
    prev_lookup = {(): 0}
    for order in range(1, N + 1):
        children = list(itertools.combinations_with_replacement(range(1, K + 1), order))
        lookup = {c: i for i, c in enumerate(children)}
        prev = blocks[-1]
        forcing = np.zeros((len(children), n + 1))
        for k in range(1, K + 1):
            rows, cols, coef = [], [], []
            for i, c in enumerate(children):
                mult = c.count(k)
                if mult:
                    j = c.index(k)
                    parent = c[:j] + c[j + 1 :]
                    rows.append(i)
                    cols.append(prev_lookup[parent])
                    coef.append(math.sqrt(mult))
            if rows:
                mat = sparse.csr_matrix((coef, (rows, cols)), shape=(len(children), prev.shape[0]))
                forcing += (mat @ prev) * basis[k - 1]
        block = p.sigma * _apply_chunked(w, forcing)
        blocks.append(block)
        indices.extend(MultiIndex.from_modes(c) for c in children)
        prev_lookup = lookup
    return ChaosTable(grid.T, K, N, indices, np.concatenate(blocks, axis=0))


def generalized_noise_table(T: float, K: int, beta: float, gamma: float, t: float | None = None) -> dict[int, float]:
    """First-order coefficients ``{k: I^(1+beta-gamma) m_k(t)}`` for ``k = 1..K`` (default ``t = T``)."""
    t = T if t is None else t
    return {k: genproc_coeff(k, t, T, beta, gamma) for k in range(1, K + 1)}


def dyadic_block_sums(coeffs: Mapping[int, float], q: WeightSequence, max_level: int) -> np.ndarray:
    """``B_j = sum_{2**j <= k < 2**(j+1)} q_k x_k**2`` for ``j = 0..max_level``."""
    out = np.zeros(max_level + 1)
    for k, x in coeffs.items():
        j = int(math.floor(math.log2(k)))
        if j <= max_level:
            out[j] += q(k) * _norm_sq(x)
    return out
