"""Counter-based Gaussian noise addressable by (seed, path, step).

Each path owns a Philox stream keyed by ``(seed, path_index)``. Step ``j``
of that path consumes the raw 64-bit outputs ``2j`` and ``2j + 1`` through a
Box-Muller transform, so any draw can be regenerated without replaying
other paths, and chunking paths across threads never changes the result.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .errors import DomainError

_MASK64 = (1 << 64) - 1
_JOBS_ENV = "FRACSDE_JOBS"


def _stream(seed: int, path_index: int) -> np.random.Philox:
    if not (0 <= seed <= _MASK64):
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.Philox(key=(int(path_index) << 64) | int(seed))


def _uniform53(raw: np.ndarray) -> np.ndarray:
    # Open interval (0, 1): never 0, so the logarithm below is finite.
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def path_normals(seed: int, path_index: int, n_steps: int, start_step: int = 0) -> np.ndarray:
    """Standard normals for steps ``start_step .. start_step + n_steps - 1`` of one path."""
    bitgen = _stream(seed, path_index)
    raw = bitgen.random_raw(2 * (start_step + n_steps))[2 * start_step :]
    u1 = _uniform53(raw[0::2])
    u2 = _uniform53(raw[1::2])
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


def standard_normals(seed: int, n_paths: int, n_steps: int, first_path: int = 0) -> np.ndarray:
    """``(n_paths, n_steps)`` array of normals for paths ``first_path, first_path + 1, ...``."""
    out = np.empty((n_paths, n_steps))
    for row in range(n_paths):
        out[row] = path_normals(seed, first_path + row, n_steps)
    return out


def resolve_jobs(jobs: int | None = None) -> int:
    """Worker count: explicit value, else ``FRACSDE_JOBS``, else the number of CPUs."""
    if jobs is None:
        env = os.environ.get(_JOBS_ENV)
        if env:
            try:
                jobs = int(env)
            except ValueError as exc:
                raise DomainError(f"{_JOBS_ENV} must be an integer, got {env!r}") from exc
        else:
            jobs = os.cpu_count() or 1
    if jobs < 1:
        raise DomainError(f"jobs must be at least 1, got {jobs}")
    return jobs


def map_path_chunks(
    work: Callable[[int, int], np.ndarray], n_paths: int, jobs: int | None = None, chunk: int = 1024
) -> np.ndarray:
    """Run ``work(first_path, count)`` over consecutive path chunks and stack the rows.

    The chunking is fixed by ``chunk`` alone, so results do not depend on ``jobs``.
    """
    starts = list(range(0, n_paths, chunk))
    sizes = [min(chunk, n_paths - s) for s in starts]
    workers = min(resolve_jobs(jobs), len(starts))
    if workers <= 1:
        parts = [work(s, c) for s, c in zip(starts, sizes)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, starts, sizes))
    return np.concatenate(parts, axis=0)
