"""Binary and JSON file formats.

Raw grids: 16-byte header (``b"ROII"``, u32 rows, u32 cols, u32 reserved)
followed by little-endian float64 values in row-major order.

Sparse matrices: ``b"ROISMTX\\0"``, u64 nnz, then ``nnz`` records of
(u64 row, u64 col, f64 weight), all little-endian.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import scipy.sparse as sp

GRID_MAGIC = b"ROII"
MATRIX_MAGIC = b"ROISMTX\0"
_TRIPLET = np.dtype([("row", "<u8"), ("col", "<u8"), ("val", "<f8")])


def write_grid(path, values) -> None:
    a = np.asarray(values, dtype="<f8")
    if a.ndim != 2:
        raise ValueError("grid must be two-dimensional")
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC + struct.pack("<III", a.shape[0], a.shape[1], 0))
        fh.write(np.ascontiguousarray(a).tobytes())


def read_grid(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < 16 or data[:4] != GRID_MAGIC:
        raise ValueError(f"{path}: not a raw grid file")
    rows, cols, _ = struct.unpack("<III", data[4:16])
    body = data[16:]
    if len(body) != 8 * rows * cols:
        raise ValueError(f"{path}: expected {rows}x{cols} values, found {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(float)


def write_matrix(path, matrix) -> None:
    coo = sp.coo_matrix(matrix)
    rec = np.empty(coo.nnz, dtype=_TRIPLET)
    rec["row"], rec["col"], rec["val"] = coo.row, coo.col, coo.data
    with open(path, "wb") as fh:
        fh.write(MATRIX_MAGIC + struct.pack("<Q", coo.nnz))
        fh.write(rec.tobytes())


def read_matrix(path, shape) -> sp.csr_matrix:
    data = Path(path).read_bytes()
    if data[:8] != MATRIX_MAGIC:
        raise ValueError(f"{path}: not a matrix dump")
    (nnz,) = struct.unpack("<Q", data[8:16])
    rec = np.frombuffer(data[16:], dtype=_TRIPLET)
    if rec.size != nnz:
        raise ValueError(f"{path}: header announces {nnz} entries, found {rec.size}")
    return sp.csr_matrix((rec["val"], (rec["row"].astype(np.int64), rec["col"].astype(np.int64))), shape=shape)


def load_json(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError(f"{path}: expected a JSON object")
    return cfg
