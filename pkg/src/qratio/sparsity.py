"""Entropy-based effective sparsity of real vectors.

For a nonzero vector z and an order q, the sparsity level is
``(||z||_1 / ||z||_q)**(q/(q-1))``, which equals ``exp(H_q(pi(z)))`` where
``pi(z) = |z| / ||z||_1`` and ``H_q`` is the Renyi entropy of order q.  The
orders q = 0, 1, inf are the usual limits: nonzero count, exp of the Shannon
entropy, and ``||z||_1 / ||z||_inf``.

Orders are plain floats: ``0.0``, ``1.0``, ``math.inf`` and any finite q > 0
are accepted; negative or NaN orders are rejected.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ZeroSignalError",
    "MeasurementMatrix",
    "as_signal",
    "as_matrix",
    "check_q",
    "lq_norm",
    "q_ratio_sparsity",
    "weight_distribution",
    "best_k_term_error",
    "q_over_q_minus_1",
    "k_power",
    "l1_sphere_radius",
]

# entries of pi below this are dropped before taking logs (0*log 0 = 0)
_ENTROPY_FLOOR = 1e-300

# above this order the ratio form |z_i|**q can overflow; the entropy form
# with max-factoring evaluates the same number safely
_LARGE_Q = 50.0


class ZeroSignalError(ValueError):
    """The zero vector has no weight distribution."""


def as_signal(z) -> np.ndarray:
    """Validate and return a 1-D float64 vector (length >= 1, all finite)."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1 or z.size < 1:
        raise ValueError(f"expected a 1-D vector of length >= 1, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ValueError("vector entries must be finite")
    return z


@dataclass(frozen=True)
class MeasurementMatrix:
    """Dense m x N measurement matrix with ensemble metadata.

    ``ensemble`` is one of ``gaussian``, ``bernoulli``, ``hadamard_sub`` or
    ``custom``.  When ``columns_normalized`` is set, every column must have
    unit Euclidean norm within 1e-10.
    """

    entries: np.ndarray
    ensemble: str = "custom"
    columns_normalized: bool = False

    _ENSEMBLES = ("gaussian", "bernoulli", "hadamard_sub", "custom")

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        if self.ensemble not in self._ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        object.__setattr__(self, "entries", a)
        if self.columns_normalized:
            norms = np.linalg.norm(a, axis=0)
            if np.any(np.abs(norms - 1.0) > 1e-10):
                raise ValueError("columns_normalized set but column norms deviate from 1")

    @property
    def shape(self):
        return self.entries.shape


def as_matrix(A) -> np.ndarray:
    """Return the underlying 2-D float64 array of a matrix-like argument."""
    if isinstance(A, MeasurementMatrix):
        return A.entries
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix entries must be finite")
    return A


def check_q(q) -> float:
    """Validate a sparsity order: 0, 1, inf or any finite q > 0."""
    q = float(q)
    if math.isnan(q) or q < 0.0:
        raise ValueError(f"sparsity order must be in [0, inf], got {q}")
    return q


def q_over_q_minus_1(q: float) -> float:
    """The exponent q/(q-1), evaluating to 1 at q = inf.

    All the recovery constants (2**(q/(q-1)), s**((q-1)/q), ...) are derived
    from this single helper so the q = inf limits stay consistent everywhere.
    """
    q = check_q(q)
    if q <= 1.0:
        raise ValueError(f"q/(q-1) requires q > 1, got {q}")
    if math.isinf(q):
        return 1.0
    return q / (q - 1.0)


def k_power(k: float, q: float) -> float:
    """k**(1 - 1/q), evaluating to k at q = inf."""
    q = check_q(q)
    if q <= 1.0:
        raise ValueError(f"k**(1-1/q) used with q > 1 only, got q={q}")
    if math.isinf(q):
        return float(k)
    return float(k) ** (1.0 - 1.0 / q)


def l1_sphere_radius(s: float, q: float) -> float:
    """s**((q-1)/q): the l1 budget of unit-l_q vectors with sparsity <= s."""
    return float(s) ** (1.0 / q_over_q_minus_1(q))


def lq_norm(z, q) -> float:
    """Extended l_q functional of a vector.

    ``q = 0`` counts nonzero entries (an exact-zero test; threshold
    beforehand if you need numerical sparsity), ``q = inf`` is the max
    magnitude, and finite q > 0 is ``(sum |z_i|**q)**(1/q)`` (a quasi-norm
    for q < 1).  Evaluation factors out the max magnitude so large orders do
    not overflow.
    """
    z = as_signal(z)
    q = check_q(q)
    a = np.abs(z)
    if q == 0.0:
        return float(np.count_nonzero(z))
    mx = float(a.max())
    if mx == 0.0:
        return 0.0
    if math.isinf(q):
        return mx
    if q == 1.0:
        return float(a.sum())
    return mx * float(np.sum((a / mx) ** q)) ** (1.0 / q)


def weight_distribution(z) -> np.ndarray:
    """The probability vector pi(z) = |z| / ||z||_1.

    Raises
    ------
    ZeroSignalError
        If z is the zero vector.
    """
    z = as_signal(z)
    a = np.abs(z)
    total = a.sum()
    if total == 0.0:
        raise ZeroSignalError("weight distribution of the zero vector is undefined")
    return a / total


def _renyi_entropy(pi: np.ndarray, q: float) -> float:
    """H_q(pi) for finite q not in {0, 1}, stable for q near 1 and q large."""
    p = pi[pi > _ENTROPY_FLOOR]
    if abs(q - 1.0) < 1e-4:
        # sum p**q - 1 = sum p*(p**(q-1) - 1), accurate where log(sum p**q)
        # would cancel
        t = np.sum(p * np.expm1((q - 1.0) * np.log(p)))
        return float(np.log1p(t) / (1.0 - q))
    mx = p.max()
    log_sum = q * np.log(mx) + np.log(np.sum((p / mx) ** q))
    return float(log_sum / (1.0 - q))


def q_ratio_sparsity(z, q) -> float:
    """Effective number of coordinates of z at order q; 0 for the zero vector.

    Equals ``exp(H_q(pi(z)))``: the nonzero count at q = 0, exp of the Shannon
    entropy at q = 1, ``(||z||_1/||z||_q)**(q/(q-1))`` at finite q != 1, and
    ``||z||_1/||z||_inf`` at q = inf.  Always in [0, N], scale invariant, and
    non-increasing in q.
    """
    z = as_signal(z)
    q = check_q(q)
    if not np.any(z):
        return 0.0
    if q == 0.0:
        return float(np.count_nonzero(z))
    pi = weight_distribution(z)
    if q == 1.0:
        p = pi[pi > _ENTROPY_FLOOR]
        return float(np.exp(-np.sum(p * np.log(p))))
    if math.isinf(q):
        return float(pi.sum() / pi.max())  # = ||z||_1 / ||z||_inf
    return float(np.exp(_renyi_entropy(pi, q)))


def best_k_term_error(x, k: int) -> float:
    """l1 distance from x to the nearest k-sparse vector.

    Equals the sum of the N-k smallest magnitudes; 0 when x is k-sparse.
    """
    x = as_signal(x)
    k = int(k)
    if not 0 <= k <= x.size:
        raise ValueError(f"k must be in [0, {x.size}], got {k}")
    if k == 0:
        return float(np.abs(x).sum())
    a = np.sort(np.abs(x))
    return float(a[: x.size - k].sum())
