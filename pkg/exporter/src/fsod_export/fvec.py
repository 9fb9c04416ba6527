"""Minimal FVEC I/O, matching the detector library's interchange format.

Little-endian: magic "FVEC", u32 version 1, u64 rows, u64 cols, then
rows*cols float32 row-major. Kept standalone so the exporter couples to
the detector only through file formats.
"""

import struct
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<4sIQQ")


def write_fvec(matrix: np.ndarray, path) -> None:
    arr = np.ascontiguousarray(matrix, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"need a non-empty 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("refusing to write non-finite features")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(b"FVEC", 1, arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes(order="C"))


def read_fvec(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError(f"{path}: not an FVEC file")
    magic, version, rows, cols = _HEADER.unpack_from(data)
    if magic != b"FVEC" or version != 1:
        raise ValueError(f"{path}: not an FVEC file (magic={magic!r} v{version})")
    payload = data[_HEADER.size :]
    if len(payload) != rows * cols * 4:
        raise ValueError(f"{path}: payload size mismatch for {rows}x{cols}")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()
