"""FVEC feature-matrix interchange format.

Layout (little-endian, no padding, no footer):

    magic   4 bytes  b"FVEC"
    version u32      1
    rows    u64
    cols    u64
    payload rows*cols IEEE-754 binary32, row-major

Storage is 32-bit; downstream statistics accumulate in 64-bit. Loaded
matrices are immutable (writeable=False) so they can be shared freely.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"FVEC"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")
HEADER_SIZE = _HEADER.size  # 24 bytes


class FvecError(ValueError):
    """Malformed FVEC file or a matrix violating the format contract."""


def validate_features(matrix: np.ndarray) -> np.ndarray:
    """Check the feature-matrix invariants and return the array as float32.

    Requires a 2-D array with rows >= 1, cols >= 1 and every entry finite.
    The returned array is C-contiguous float32 (the storage precision).
    """
    arr = np.asarray(matrix)
    if arr.ndim != 2:
        raise FvecError(f"feature matrix must be 2-D, got shape {arr.shape}")
    rows, cols = arr.shape
    if rows < 1 or cols < 1:
        raise FvecError(f"feature matrix must be at least 1x1, got {rows}x{cols}")
    arr = np.ascontiguousarray(arr, dtype=np.float32)
    if not np.all(np.isfinite(arr)):
        i, j = np.argwhere(~np.isfinite(arr))[0]
        raise FvecError(f"non-finite entry at ({i},{j})")
    return arr


def write_features(matrix: np.ndarray, path: str | Path) -> None:
    """Write a feature matrix to *path* in FVEC format.

    Entries are stored as float32; input with non-finite entries is rejected.
    Output bytes are identical across platforms for identical input.
    """
    arr = validate_features(matrix)
    rows, cols = arr.shape
    header = _HEADER.pack(MAGIC, VERSION, rows, cols)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(arr.tobytes(order="C"))


def read_features(path: str | Path) -> np.ndarray:
    """Read an FVEC file and return an immutable (N, D) float32 matrix."""
    with open(path, "rb") as fh:
        header = fh.read(HEADER_SIZE)
        if len(header) < HEADER_SIZE:
            raise FvecError(f"not an FVEC file (short header): {path}")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise FvecError(f"not an FVEC file: {path}")
        if version != VERSION:
            raise FvecError(f"unsupported FVEC version {version}: {path}")
        if rows < 1 or cols < 1:
            raise FvecError(f"invalid dimensions {rows}x{cols}: {path}")
        payload = fh.read()
    expected = rows * cols * 4
    if len(payload) < expected:
        raise FvecError(
            f"truncated payload: declared {rows}x{cols} needs {expected} bytes, "
            f"found {len(payload)}: {path}"
        )
    if len(payload) > expected:
        raise FvecError(
            f"trailing data after {rows}x{cols} payload ({len(payload) - expected} "
            f"extra bytes): {path}"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    if not np.all(np.isfinite(data)):
        i, j = np.argwhere(~np.isfinite(data))[0]
        raise FvecError(f"non-finite entry at ({i},{j}): {path}")
    out = np.asarray(data, dtype=np.float32)
    out.flags.writeable = False
    return out
