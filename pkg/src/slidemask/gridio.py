"""Binary container for 2-D masks and spectrograms.

Layout: 4 magic bytes, rows and cols as little-endian uint32, then the values
row-major as little-endian float64. Complex grids use a separate magic and
store interleaved (real, imag) pairs.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import DataError, ShapeError

REAL_MAGIC = b"SMG1"
COMPLEX_MAGIC = b"SMC1"
_HEADER = struct.Struct("<4sII")


def save_grid(path, grid) -> None:
    grid = np.asarray(grid)
    if grid.ndim != 2:
        raise ShapeError(f"grid must be 2-D, got shape {grid.shape}")
    rows, cols = grid.shape
    if np.iscomplexobj(grid):
        magic = COMPLEX_MAGIC
        body = np.ascontiguousarray(grid, dtype="<c16").view("<f8")
    else:
        magic = REAL_MAGIC
        body = np.ascontiguousarray(grid, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, rows, cols))
        fh.write(body.tobytes())


def load_grid(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DataError(f"{path}: truncated grid header")
    magic, rows, cols = _HEADER.unpack_from(data)
    if magic == REAL_MAGIC:
        dtype, width = "<f8", 8
    elif magic == COMPLEX_MAGIC:
        dtype, width = "<c16", 16
    else:
        raise DataError(f"{path}: bad grid magic {magic!r}")
    body = data[_HEADER.size :]
    if len(body) != rows * cols * width:
        raise DataError(f"{path}: expected {rows}x{cols} values, file holds {len(body) // width}")
    return np.frombuffer(body, dtype=dtype).reshape(rows, cols).astype(dtype[1:])
