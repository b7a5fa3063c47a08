"""Token file formats.

Binary layout: magic b"SAT1", three little-endian uint32 (N, C,
reserved=0), then N*C little-endian float64 values in row-major token
order. The CSV twin has header ``token_id,c0,...,c{C-1}`` and uses
repr() floats, which round-trip float64 exactly.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import TokenFormatError
from .tokens import as_token_matrix

MAGIC = b"SAT1"
_HEADER = struct.Struct("<4sIII")


def save_tokens(path, m) -> None:
    m = as_token_matrix(m)
    n, c = m.shape
    payload = np.ascontiguousarray(m, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, n, c, 0))
        fh.write(payload)


def load_tokens(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise TokenFormatError(f"{path}: truncated payload (no header)")
    magic, n, c, _reserved = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise TokenFormatError(f"{path}: bad magic {magic!r}")
    if n < 1 or c < 1:
        raise TokenFormatError(f"{path}: invalid dimensions {n}x{c}")
    expected = _HEADER.size + 8 * n * c
    if len(raw) < expected:
        raise TokenFormatError(
            f"{path}: truncated payload ({len(raw)} bytes, expected {expected})"
        )
    if len(raw) > expected:
        raise TokenFormatError(
            f"{path}: trailing bytes ({len(raw)} bytes, expected {expected})"
        )
    data = np.frombuffer(raw, dtype="<f8", count=n * c, offset=_HEADER.size)
    m = data.astype(np.float64).reshape(n, c)
    if not np.isfinite(m).all():
        raise TokenFormatError(f"{path}: non-finite values in payload")
    return np.ascontiguousarray(m)


def save_tokens_csv(path, m) -> None:
    m = as_token_matrix(m)
    n, c = m.shape
    with open(path, "w", encoding="ascii") as fh:
        fh.write("token_id," + ",".join(f"c{j}" for j in range(c)) + "\n")
        for i in range(n):
            fh.write(str(i) + "," + ",".join(repr(float(v)) for v in m[i]) + "\n")


def load_tokens_csv(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().rstrip("\n")
        cols = header.split(",")
        if not cols or cols[0] != "token_id":
            raise TokenFormatError(f"{path}: bad CSV header {header!r}")
        c = len(cols) - 1
        if c < 1 or cols[1:] != [f"c{j}" for j in range(c)]:
            raise TokenFormatError(f"{path}: bad CSV header {header!r}")
        rows = []
        for lineno, line in enumerate(fh):
            parts = line.rstrip("\n").split(",")
            if len(parts) != c + 1:
                raise TokenFormatError(
                    f"{path}: row {lineno} has {len(parts) - 1} channels, expected {c}"
                )
            try:
                rows.append([float(p) for p in parts[1:]])
            except ValueError as exc:
                raise TokenFormatError(f"{path}: row {lineno}: {exc}") from exc
    if not rows:
        raise TokenFormatError(f"{path}: no token rows")
    m = np.asarray(rows, dtype=np.float64)
    if not np.isfinite(m).all():
        raise TokenFormatError(f"{path}: non-finite values in payload")
    return np.ascontiguousarray(m)
