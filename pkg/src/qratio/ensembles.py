"""Deterministic random-matrix ensembles.

All entropy comes from numpy's PCG64 generator seeded explicitly, so a spec
regenerates its matrix bit-identically on any platform with the same numpy
stream (standard normal variates use the generator's ziggurat transform).
Hadamard submatrices use the Sylvester construction with a Fisher-Yates row
permutation driven by its own seed.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard

from .sparsity import MeasurementMatrix

__all__ = ["EnsembleSpec", "generate", "nested_row_prefix"]


@dataclass(frozen=True)
class EnsembleSpec:
    kind: str  # "gaussian" | "bernoulli" | "hadamard_sub"
    m: int
    N: int
    seed: int = 0
    scale: float | None = None  # default 1/sqrt(m) for gaussian/bernoulli
    normalize_columns: bool = False
    row_permutation_seed: int | None = None  # hadamard_sub only

    def __post_init__(self):
        if self.kind not in ("gaussian", "bernoulli", "hadamard_sub"):
            raise ValueError(f"unknown ensemble kind {self.kind!r}")
        if self.m < 1 or self.N < 1:
            raise ValueError("m and N must be >= 1")
        if self.kind == "hadamard_sub":
            if self.N & (self.N - 1) or self.N < 1:
                raise ValueError("hadamard_sub requires N to be a power of 2")
            if self.m > self.N:
                raise ValueError("hadamard_sub requires m <= N")


def _raw_entries(spec: EnsembleSpec) -> np.ndarray:
    scale = spec.scale if spec.scale is not None else 1.0 / np.sqrt(spec.m)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "gaussian":
        return rng.standard_normal((spec.m, spec.N)) * scale
    if spec.kind == "bernoulli":
        signs = np.where(rng.random((spec.m, spec.N)) < 0.5, -1.0, 1.0)
        return signs * scale
    H = hadamard(spec.N).astype(np.float64)
    perm_seed = (
        spec.row_permutation_seed if spec.row_permutation_seed is not None else spec.seed
    )
    perm = np.random.default_rng(perm_seed).permutation(spec.N)
    return H[perm[: spec.m]]


def _normalize_columns(entries: np.ndarray) -> np.ndarray:
    return entries / np.linalg.norm(entries, axis=0)


def generate(spec: EnsembleSpec) -> MeasurementMatrix:
    """Draw the matrix described by ``spec`` (bit-reproducible).

    Hadamard submatrices are always column-normalized (their construction
    ends with unit scaling); the other ensembles normalize only on request.
    """
    entries = _raw_entries(spec)
    normalized = spec.normalize_columns or spec.kind == "hadamard_sub"
    if normalized:
        entries = _normalize_columns(entries)
    return MeasurementMatrix(entries, ensemble=spec.kind, columns_normalized=normalized)


def nested_row_prefix(spec: EnsembleSpec, m_list) -> list[MeasurementMatrix]:
    """Row-prefix submatrices of one shared draw of ``spec``.

    The full spec.m x N matrix is generated once; each requested m takes its
    first m rows (so smaller matrices are literal prefixes of larger ones),
    then column normalization is applied per prefix if requested.
    """
    m_list = [int(m) for m in m_list]
    if any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ValueError("m_list must be strictly increasing")
    if m_list and m_list[-1] > spec.m:
        raise ValueError("largest prefix exceeds spec.m")
    full = _raw_entries(spec)
    out = []
    for m in m_list:
        entries = full[:m]
        normalized = spec.normalize_columns or spec.kind == "hadamard_sub"
        if normalized:
            entries = _normalize_columns(entries)
        out.append(
            MeasurementMatrix(entries, ensemble=spec.kind, columns_normalized=normalized)
        )
    return out
