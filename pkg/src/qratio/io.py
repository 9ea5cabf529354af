"""Plain-text CSV exchange for vectors and matrices.

Vectors: one value per field, a single row or a single column.  Matrices: one
row per line, comma-separated decimals, no header; dimensions are inferred.
Writers emit shortest round-trip decimal representations so outputs are
byte-stable for identical inputs.
"""

import numpy as np

from .sparsity import as_matrix, as_signal

__all__ = ["read_vector", "write_vector", "read_matrix", "write_matrix"]


def _parse_rows(path):
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rows.append([float(tok) for tok in line.split(",")])
    if not rows:
        raise ValueError(f"{path}: no data")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: ragged rows")
    return rows


def read_vector(path) -> np.ndarray:
    """Read a vector stored as a single CSV row or a single column."""
    rows = _parse_rows(path)
    if len(rows) == 1:
        return as_signal(rows[0])
    if len(rows[0]) == 1:
        return as_signal([r[0] for r in rows])
    raise ValueError(f"{path}: expected a single row or single column of values")


def write_vector(path, z) -> None:
    z = as_signal(z)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(repr(float(v)) for v in z))
        fh.write("\n")


def read_matrix(path) -> np.ndarray:
    """Read a matrix, one CSV row per line."""
    return as_matrix(_parse_rows(path))


def write_matrix(path, A) -> None:
    A = as_matrix(A)
    with open(path, "w", encoding="ascii") as fh:
        for row in A:
            fh.write(",".join(repr(float(v)) for v in row))
            fh.write("\n")
