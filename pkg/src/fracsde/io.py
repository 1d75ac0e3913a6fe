"""CSV, JSON and binary serialization of paths, ensembles and tables."""

from __future__ import annotations

import csv
import io
import json
import struct
import sys
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import DomainError, FracSDEError
from .frac_calculus import SampledPath

MAGIC = b"FSDE1"
_HEADER = struct.Struct("<QQ")


class UsageError(FracSDEError):
    """Invalid command-line usage detected after argument parsing."""


def format_value(x: Any) -> str:
    """Shortest round-trip text for floats; ``str`` for everything else."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def path_csv(path: SampledPath) -> str:
    return csv_text(("t", "value"), zip(path.t, path.values))


def read_path_csv(text: str) -> SampledPath:
    """Parse a ``t,value`` CSV on a uniform grid starting at 0."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["t", "value"]:
        raise DomainError("path CSV must have header 't,value'")
    data = np.array([[float(a), float(b)] for a, b in reader], dtype=float)
    if data.shape[0] < 2:
        raise DomainError("path CSV needs at least two rows")
    t = data[:, 0]
    if t[0] != 0.0:
        raise DomainError("path CSV must start at t = 0")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0) or steps[0] <= 0:
        raise DomainError("path CSV must be on a uniform increasing grid")
    return SampledPath(float(t[-1]), data[:, 1])


def ensemble_matrix(t: np.ndarray, data: np.ndarray) -> np.ndarray:
    """Node-major matrix: column 0 is ``t``, column ``p + 1`` is path ``p``."""
    return np.column_stack([t, data.T])


def ensemble_csv(t: np.ndarray, data: np.ndarray) -> str:
    header = ["t"] + [f"path{p}" for p in range(data.shape[0])]
    return csv_text(header, ensemble_matrix(t, data).tolist())


def ensemble_bytes(t: np.ndarray, data: np.ndarray) -> bytes:
    """``FSDE1`` magic, row and column counts (uint64), then little-endian float64 row-major."""
    mat = np.ascontiguousarray(ensemble_matrix(t, data), dtype="<f8")
    return MAGIC + _HEADER.pack(*mat.shape) + mat.tobytes()


def read_ensemble_bytes(blob: bytes) -> np.ndarray:
    if not blob.startswith(MAGIC):
        raise DomainError("not an FSDE1 block")
    rows, cols = _HEADER.unpack_from(blob, len(MAGIC))
    start = len(MAGIC) + _HEADER.size
    expected = start + 8 * rows * cols
    if len(blob) != expected:
        raise DomainError(f"FSDE1 block has {len(blob)} bytes, expected {expected}")
    return np.frombuffer(blob, dtype="<f8", offset=start).reshape(rows, cols).copy()


def json_text(obj: Any) -> str:
    return json.dumps(obj, indent=None, separators=(",", ":"), allow_nan=True) + "\n"


def write_output(data: str | bytes, path: str | None, force: bool = False) -> None:
    """Write to ``path`` (refusing to overwrite unless ``force``) or to standard output."""
    if path is None or path == "-":
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(data)
        return
    target = Path(path)
    if target.exists() and not force:
        raise UsageError(f"{path} exists; pass --force to overwrite")
    if isinstance(data, bytes):
        target.write_bytes(data)
    else:
        target.write_text(data)
