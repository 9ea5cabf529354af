"""Monte Carlo restricted isometry constants and the RIC recovery bound.

delta_{2k}(A) is approximated by the max of max(sigma_1^2 - 1, 1 -
sigma_{2k}^2) over randomly drawn m x 2k column submatrices.  Sampled maxima
never exceed the true constant, so the estimate carries a LOWER_BOUND tag
(bounds built from it are optimistic).  Squared singular values come from the
Gram-matrix eigenvalues, which keeps exactly orthonormal submatrices at
delta = 0 exactly.
"""

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .sparsity import as_matrix

__all__ = ["RicEstimate", "estimate_ric", "exhaustive_ric", "ric_bound"]

LOWER_BOUND = "LOWER_BOUND"

# RIC bound applies below sqrt(2) - 1
_DELTA_LIMIT = math.sqrt(2.0) - 1.0


@dataclass
class RicEstimate:
    delta: float
    k: int
    n_samples: int
    direction: str = LOWER_BOUND
    degenerate: bool = False  # 2k > m forces sigma_{2k} = 0


def _submatrix_value(A: np.ndarray, support: np.ndarray) -> float:
    G = A[:, support].T @ A[:, support]
    ev = np.linalg.eigvalsh(G)
    return max(ev[-1] - 1.0, 1.0 - ev[0])


def estimate_ric(A, k: int, n_samples: int = 1000, seed: int = 0) -> RicEstimate:
    """Sampled delta_{2k}; deterministic given seed.

    Supports are the first 2k entries of per-draw random permutations, so for
    a fixed seed the draws are nested across k (monotonicity in k holds
    sample-by-sample) and across n_samples (incremental sampling).
    """
    A = as_matrix(A)
    m, N = A.shape
    k = int(k)
    if k < 1 or 2 * k > N:
        raise ValueError(f"need 1 <= 2k <= N, got k={k}, N={N}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    col_norms = np.linalg.norm(A, axis=0)
    if np.any(np.abs(col_norms - 1.0) > 1e-8):
        warnings.warn("columns are not unit-normalized; RIC values assume unit columns")
    degenerate = 2 * k > m
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(int(n_samples)):
        support = rng.permutation(N)[: 2 * k]
        worst = max(worst, _submatrix_value(A, support))
    return RicEstimate(
        delta=max(worst, 0.0),
        k=k,
        n_samples=int(n_samples),
        degenerate=degenerate,
    )


def exhaustive_ric(A, k: int) -> float:
    """Exact delta_{2k} by enumerating every column subset (tiny N only)."""
    A = as_matrix(A)
    m, N = A.shape
    k = int(k)
    if k < 1 or 2 * k > N:
        raise ValueError(f"need 1 <= 2k <= N, got k={k}, N={N}")
    worst = 0.0
    for support in combinations(range(N), 2 * k):
        worst = max(worst, _submatrix_value(A, np.asarray(support)))
    return max(worst, 0.0)


def ric_bound(delta: float, k: int, q: float, eps: float) -> float | None:
    """BP error bound C k^{1/q-1/2} eps with C = 4 sqrt(1+delta) /
    (1 - (1+sqrt 2) delta), valid for 1 <= q <= 2 and delta < sqrt(2)-1;
    returns None where it does not apply."""
    if not 1.0 <= q <= 2.0:
        raise ValueError(f"the RIC bound is stated for q in [1, 2], got {q}")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if delta >= _DELTA_LIMIT:
        return None
    C = 4.0 * math.sqrt(1.0 + delta) / (1.0 - (1.0 + math.sqrt(2.0)) * delta)
    return C * float(k) ** (1.0 / q - 0.5) * eps
