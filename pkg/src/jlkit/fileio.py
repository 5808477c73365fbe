"""Binary vector files, CSV vectors and turnstile stream files."""
from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DimensionError

__all__ = [
    "MAGIC",
    "FormatError",
    "StreamFile",
    "write_vectors",
    "read_vectors",
    "vectors_to_bytes",
    "vectors_from_bytes",
    "read_vectors_csv",
    "write_vectors_csv",
    "parse_stream",
    "read_stream",
    "write_stream",
]

MAGIC = b"JLV1"
_HEADER = struct.Struct("<4sIQ")


class FormatError(ValueError):
    """Input bytes or text do not follow the expected format."""


def vectors_to_bytes(X) -> bytes:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionError(f"need a non-empty (count, dim) array, got shape {X.shape}")
    count, dim = X.shape
    return _HEADER.pack(MAGIC, dim, count) + np.ascontiguousarray(X, dtype="<f8").tobytes()


def vectors_from_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < _HEADER.size:
        raise FormatError("vector file shorter than its header")
    magic, dim, count = _HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if dim < 1 or count < 1:
        raise FormatError("dim and count must be positive")
    if len(buf) != _HEADER.size + 8 * dim * count:
        raise FormatError(f"expected {_HEADER.size + 8 * dim * count} bytes, got {len(buf)}")
    body = np.frombuffer(buf, dtype="<f8", offset=_HEADER.size)
    return body.reshape(count, dim).astype(np.float64)


def write_vectors(path, X) -> None:
    Path(path).write_bytes(vectors_to_bytes(X))


def read_vectors(path) -> np.ndarray:
    return vectors_from_bytes(Path(path).read_bytes())


def read_vectors_csv(path) -> np.ndarray:
    rows = []
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            rows.append([float(tok) for tok in line.split(",")])
        except ValueError:
            raise FormatError(f"line {n}: not a comma-separated list of numbers")
    if not rows:
        raise FormatError("no vectors in CSV input")
    if len({len(r) for r in rows}) != 1:
        raise FormatError("CSV rows have differing lengths")
    return np.array(rows, dtype=np.float64)


def write_vectors_csv(path, X) -> None:
    X = np.asarray(X, dtype=np.float64)
    Path(path).write_text("".join(",".join(repr(float(v)) for v in row) + "\n" for row in X))


@dataclass(frozen=True, eq=False)
class StreamFile:
    indices: np.ndarray
    values: np.ndarray
    d: int | None = None
    M: int | None = None


_HEADER_RE = re.compile(r"#\s*d\s*=\s*(\d+)\s+M\s*=\s*(\d+)\s*$")


def parse_stream(text: str, d: int | None = None) -> StreamFile:
    """Parse ``index,value`` lines; an optional ``#d=<d> M=<M>`` line sets the bounds.

    Other ``#`` lines and blank lines are skipped.  An explicit ``d`` argument
    must agree with the header.
    """
    M = None
    idx, val = [], []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            mh = _HEADER_RE.fullmatch(line)
            if mh:
                hd, M = int(mh.group(1)), int(mh.group(2))
                if d is not None and d != hd:
                    raise DimensionError(f"stream header says d={hd}, expected {d}")
                d = hd
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"line {n}: expected 'index,value'")
        try:
            i, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError(f"line {n}: fields must be integers")
        if M is not None and abs(v) > M:
            raise FormatError(f"line {n}: |value| exceeds M={M}")
        idx.append(i)
        val.append(v)
    indices = np.array(idx, dtype=np.int64)
    if d is not None and indices.size and (indices.min() < 0 or indices.max() >= d):
        raise DimensionError(f"stream index outside [0, {d})")
    return StreamFile(indices, np.array(val, dtype=np.int64), d, M)


def read_stream(path, d: int | None = None) -> StreamFile:
    return parse_stream(Path(path).read_text(), d)


def write_stream(path, indices, values, d: int, M: int | None = None) -> None:
    values = np.asarray(values, dtype=np.int64)
    if M is None:
        M = int(np.max(np.abs(values))) if values.size else 0
    lines = [f"#d={d} M={M}"] + [f"{int(i)},{int(v)}" for i, v in zip(indices, values)]
    Path(path).write_text("\n".join(lines) + "\n")
