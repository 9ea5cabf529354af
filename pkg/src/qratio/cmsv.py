"""Constrained minimal singular values at sparsity order q.

``rho_{q,s}(A) = min ||Az||_2 / ||z||_q`` over nonzero z whose q-ratio
sparsity is at most s.  With the normalization ``||z||_q = 1`` the sparsity
cap becomes the l1 budget ``||z||_1 <= s**((q-1)/q)``, and the estimator runs
multi-start projected gradient descent of ``||Az||_2**2`` over that set.  A
local method can only overshoot the global minimum, so every estimate is an
upper bound on the true value; the ``direction`` tag records this and is
propagated into downstream bound reports.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .sparsity import as_matrix, check_q, l1_sphere_radius

__all__ = [
    "InvalidQError",
    "InvalidSError",
    "InvalidOrderError",
    "CmsvRequest",
    "CmsvEstimate",
    "OrderChainReport",
    "estimate_cmsv",
    "brute_force_cmsv",
    "check_order_chain",
    "pg_stationarity",
]

UPPER_BOUND = "UPPER_BOUND"


class InvalidQError(ValueError):
    """CMSV is defined for orders q in (1, inf]."""


class InvalidSError(ValueError):
    """The sparsity cap s must lie in [1, N]."""


class InvalidOrderError(ValueError):
    """Order chain requires 1 < q2 <= q1 <= inf."""


def _check_cmsv_q(q) -> float:
    q = check_q(q)
    if q <= 1.0:
        raise InvalidQError(f"CMSV requires q > 1, got {q}")
    return q


@dataclass(frozen=True)
class CmsvRequest:
    """One CMSV evaluation: matrix, order q > 1, sparsity cap s in [1, N]."""

    matrix: object
    q: float
    s: float
    restarts: int = 30
    seed: int = 0
    max_iter: int = 5000
    tol_move: float = 1e-9

    def __post_init__(self):
        A = as_matrix(self.matrix)
        object.__setattr__(self, "matrix", A)
        object.__setattr__(self, "q", _check_cmsv_q(self.q))
        s = float(self.s)
        if not 1.0 <= s <= A.shape[1]:
            raise InvalidSError(f"s must be in [1, {A.shape[1]}], got {s}")
        object.__setattr__(self, "s", s)
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class CmsvEstimate:
    """Best trial of a multi-start run; an upper bound on the true CMSV."""

    value: float
    minimizer: np.ndarray
    trial_values: np.ndarray
    q: float
    s: float
    direction: str = UPPER_BOUND
    stationarity: float = math.nan
    trial_statuses: np.ndarray = field(default=None, repr=False)


def _start_points(N: int, q: float, R: float, restarts: int, seed: int) -> np.ndarray:
    """Deterministic per-trial starts: Gaussian, pushed toward the feasible
    set by ten alternations, with a signed-spike fallback (always feasible)."""
    Z0 = np.empty((restarts, N))
    for trial in range(restarts):
        rng = np.random.default_rng([seed, trial])
        z = rng.standard_normal(N)
        z = kernels.retract_to_sphere(z, q, R, cycles=10)
        nq = kernels.lq_norm_fast(z, q)
        if nq < 0.5 or abs(nq - 1.0) > 1e-6 or np.abs(z).sum() > R * (1 + 1e-6):
            z = np.zeros(N)
            z[rng.integers(N)] = 1.0 if rng.random() < 0.5 else -1.0
        Z0[trial] = z
    return Z0


def pg_stationarity(A, z, q: float, s: float) -> float:
    """Projected-gradient residual at z: distance moved by one retracted
    gradient step of length ~1/L (small at first-order stationary points)."""
    A = as_matrix(A)
    q = _check_cmsv_q(q)
    R = l1_sphere_radius(s, q)
    L = 2.0 * np.linalg.norm(A, 2) ** 2
    g = 2.0 * (A.T @ (A @ z))
    step = 1.0 / L
    for _ in range(8):
        probe = kernels.retract_to_sphere(z - step * g, q, R)
        # a probe that collapses to zero is an artifact of the step length,
        # not of z; shrink and retry
        if kernels.lq_norm_fast(probe, q) > 0.5:
            return float(np.linalg.norm(probe - z))
        step *= 0.5
    return float("inf")


def estimate_cmsv(req: CmsvRequest) -> CmsvEstimate:
    """Multi-restart projected-gradient estimate of rho_{q,s}.

    Deterministic given ``req.seed``: trial i draws its start from the RNG
    stream keyed by (seed, i), and trials are order-independent.
    """
    A = req.matrix
    N = A.shape[1]
    R = l1_sphere_radius(req.s, req.q)
    AtA = np.ascontiguousarray(A.T @ A)
    L = 2.0 * np.linalg.norm(A, 2) ** 2
    Z0 = np.ascontiguousarray(_start_points(N, req.q, R, req.restarts, req.seed))
    Z, fvals, _, statuses = kernels.cmsv_pg_trials(
        AtA, Z0, req.q, R, L, req.max_iter, req.tol_move, 0.0
    )
    trial_values = np.sqrt(np.maximum(fvals, 0.0))
    best = int(np.argmin(trial_values))
    minimizer = Z[best].copy()
    return CmsvEstimate(
        value=float(trial_values[best]),
        minimizer=minimizer,
        trial_values=trial_values,
        q=req.q,
        s=req.s,
        stationarity=pg_stationarity(A, minimizer, req.q, req.s),
        trial_statuses=statuses,
    )


def _sphere_samples(rng, n: int, N: int, q: float) -> np.ndarray:
    """Rows uniform on the l_q unit sphere (generalized-normal trick for
    finite q, max-rescaled box samples for q = inf)."""
    if math.isinf(q):
        Z = rng.uniform(-1.0, 1.0, (n, N))
        mx = np.abs(Z).max(axis=1)
        mx[mx == 0.0] = 1.0
        return Z / mx[:, None]
    g = rng.gamma(1.0 / q, 1.0, (n, N)) ** (1.0 / q)
    signs = rng.random((n, N)) < 0.5
    g[signs] = -g[signs]
    mx = np.abs(g).max(axis=1)
    mx[mx == 0.0] = 1.0
    scaled = np.abs(g) / mx[:, None]
    norms = mx * (scaled**q).sum(axis=1) ** (1.0 / q)
    return g / norms[:, None]


def brute_force_cmsv(
    A,
    q: float,
    s: float,
    n_samples: int = 1_000_000,
    seed: int = 0,
    polish_top: int = 100,
    polish_random: int = 100,
    polish_iters: int = 2000,
) -> float:
    """Dense-sampling oracle for rho_{q,s} on tiny instances (N <= 6).

    Uniform l_q-sphere samples are filtered to the l1 budget (the signed
    canonical spikes are always included), the best ``polish_top`` plus a
    random ``polish_random`` survivors are polished by short local descent,
    and the minimum of ||Az||_2 is returned.  Stochastic upper bound on the
    true value, converging from above as n_samples grows.
    """
    A = as_matrix(A)
    q = _check_cmsv_q(q)
    N = A.shape[1]
    if not 1.0 <= s <= N:
        raise InvalidSError(f"s must be in [1, {N}], got {s}")
    R = l1_sphere_radius(s, q)
    rng = np.random.default_rng(seed)

    best_val = math.inf
    kept = []
    chunk = 200_000
    remaining = int(n_samples)
    while remaining > 0:
        n = min(chunk, remaining)
        remaining -= n
        Z = _sphere_samples(rng, n, N, q)
        Z = Z[np.abs(Z).sum(axis=1) <= R * (1.0 + 1e-12)]
        if Z.shape[0] == 0:
            continue
        v = np.linalg.norm(Z @ A.T, axis=1)
        best_val = min(best_val, float(v.min()))
        order = np.argsort(v)
        take = order[: polish_top + polish_random]
        kept.append((Z[take], v[take]))

    spikes = np.vstack([np.eye(N), -np.eye(N)])
    v_spikes = np.linalg.norm(spikes @ A.T, axis=1)
    kept.append((spikes, v_spikes))
    Zk = np.vstack([z for z, _ in kept])
    vk = np.concatenate([v for _, v in kept])
    best_val = min(best_val, float(vk.min()))

    order = np.argsort(vk)
    cand = list(order[:polish_top])
    rest = order[polish_top:]
    if rest.size and polish_random > 0:
        cand += list(rng.choice(rest, size=min(polish_random, rest.size), replace=False))
    cand = np.array(sorted(set(int(i) for i in cand)), dtype=int)

    AtA = np.ascontiguousarray(A.T @ A)
    L = 2.0 * np.linalg.norm(A, 2) ** 2
    Z0 = np.ascontiguousarray(Zk[cand])
    _, fvals, _, _ = kernels.cmsv_pg_trials(AtA, Z0, q, R, L, polish_iters, 1e-10, 0.0)
    fmin = float(np.min(fvals)) if fvals.size else math.inf
    if math.isfinite(fmin):
        best_val = min(best_val, math.sqrt(max(fmin, 0.0)))
    return best_val


@dataclass
class OrderChainReport:
    """The three oracle values of the order-chain inequality and the verdict."""

    q1: float
    q2: float
    s: float
    exponent: float
    rho_q1_s: float
    rho_q2_se: float
    rho_q1_se_scaled: float
    passed: bool
    tolerance: float


def chain_exponent(q1: float, q2: float) -> float:
    """e = q2(q1-1)/(q1(q2-1)), the sparsity-cap exponent of the chain."""
    if math.isinf(q1):
        return q2 / (q2 - 1.0)
    return q2 * (q1 - 1.0) / (q1 * (q2 - 1.0))


def check_order_chain(
    A,
    q1: float,
    q2: float,
    s: float,
    n_samples: int = 200_000,
    seed: int = 0,
    tolerance: float = 0.02,
) -> OrderChainReport:
    """Evaluate rho_{q1,s} >= rho_{q2,s^e} >= s^{-e} rho_{q1,s^e} on oracle
    values (e = q2(q1-1)/(q1(q2-1))); all three terms use the brute-force
    oracle, and the chain is checked with multiplicative slack ``tolerance``.
    """
    A = as_matrix(A)
    q1 = _check_cmsv_q(q1)
    q2 = _check_cmsv_q(q2)
    if q2 > q1:
        raise InvalidOrderError(f"need q2 <= q1, got q1={q1}, q2={q2}")
    e = chain_exponent(q1, q2)
    N = A.shape[1]
    s = float(s)
    if not 1.0 <= s <= N ** (1.0 / e):
        raise InvalidSError(f"s must be in [1, N**(1/e)] = [1, {N ** (1.0 / e):.6g}]")
    se = s**e
    rho1 = brute_force_cmsv(A, q1, s, n_samples, seed)
    rho2 = brute_force_cmsv(A, q2, se, n_samples, seed)
    rho3 = brute_force_cmsv(A, q1, se, n_samples, seed)
    scaled = rho3 / se
    atol = 1e-9
    ok = rho1 >= rho2 * (1.0 - tolerance) - atol and rho2 >= scaled * (1.0 - tolerance) - atol
    return OrderChainReport(
        q1=q1,
        q2=q2,
        s=s,
        exponent=e,
        rho_q1_s=rho1,
        rho_q2_se=rho2,
        rho_q1_se_scaled=scaled,
        passed=bool(ok),
        tolerance=tolerance,
    )
