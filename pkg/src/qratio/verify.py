"""Certified sparsity levels for exact noise-free l1 recovery.

A k-sparse signal is the unique basis-pursuit solution whenever k is strictly
below ``min 2**(q/(1-q)) * s_q(z)`` over nonzero kernel vectors z, for some
order q > 1.  Normalizing kernel vectors to unit l1 norm turns the inner
problem into maximizing ||z||_q over {Az = 0, ||z||_1 <= 1}:

* q = inf: exactly solvable as N linear programs (one per coordinate; the
  feasible set is sign-symmetric, so maximizing z_i covers |z_i|).
* finite q > 1: nonconvex; a convex-concave procedure linearizes ||z||_q and
  solves one LP per iteration.  It returns a feasible point, so its sparsity
  level is only a heuristic upper estimate and is tagged as such.
"""

import math
from dataclasses import dataclass

import numpy as np

from .optim import SolverConfig, kernel_basis, solve_lp_batch
from .sparsity import as_matrix, check_q, lq_norm, q_over_q_minus_1

__all__ = [
    "VerificationResult",
    "sparsity_level_bound",
    "strict_floor",
    "verify_linf",
    "ccp_verify",
    "max_recoverable_sparsity",
]

EXACT = "EXACT"
HEURISTIC_UPPER = "HEURISTIC_UPPER"


@dataclass
class VerificationResult:
    q: float
    opt_value: float
    k_max: int
    certificate: str  # EXACT | HEURISTIC_UPPER
    witness: np.ndarray | None
    trace: np.ndarray | None = None  # CCP objective per iteration


def sparsity_level_bound(opt_value: float, q: float) -> float:
    """The recovery threshold (2*opt)**(-q/(q-1)); k works iff k < bound."""
    if opt_value <= 0.0:
        return math.inf
    return (2.0 * opt_value) ** (-q_over_q_minus_1(q))


def strict_floor(bound: float) -> int:
    """Largest integer strictly below ``bound``.

    The recovery condition is a strict inequality, so an exactly-integer
    bound must certify one less (within 1e-9 to absorb roundoff).
    """
    nearest = round(bound)
    if abs(bound - nearest) <= 1e-9:
        return max(int(nearest) - 1, 0)
    return max(int(math.floor(bound)), 0)


def _trivial_kernel_result(q: float, N: int) -> VerificationResult:
    # injective matrix: every signal is uniquely determined
    return VerificationResult(q=q, opt_value=0.0, k_max=N, certificate=EXACT, witness=None)


def verify_linf(A, cfg: SolverConfig = SolverConfig()) -> VerificationResult:
    """Exact maximal sparsity for noise-free BP via N linear programs.

    opt_value is max ||z||_inf over {Az = 0, ||z||_1 <= 1}; the certified
    level is the strict floor of 1/(2*opt_value).
    """
    A = as_matrix(A)
    m, N = A.shape
    basis = kernel_basis(A)
    if basis.shape[1] == 0:
        return _trivial_kernel_result(math.inf, N)
    C = np.eye(N)
    Z, values, statuses, _, _ = solve_lp_batch(A, None, C, 1.0, cfg)
    bad = [i for i, st in enumerate(statuses) if st != "converged"]
    if bad:
        raise RuntimeError(f"linf verification: LP subproblems {bad} did not converge")
    best = int(np.argmax(values))
    witness = Z[:, best]
    l1 = float(np.abs(witness).sum())
    if l1 > 0:
        witness = witness / l1
    opt = float(np.abs(witness).max())
    if opt <= 0.0:
        raise RuntimeError("nontrivial kernel but zero optimum; LP failure")
    k_max = min(strict_floor(sparsity_level_bound(opt, math.inf)), N)
    return VerificationResult(
        q=math.inf, opt_value=opt, k_max=k_max, certificate=EXACT, witness=witness
    )


def _lq_gradient(z: np.ndarray, q: float) -> np.ndarray:
    """Gradient of ||z||_q at z != 0: (|z_i|/||z||_q)**(q-1) * sign(z_i),
    with the continuous extension 0 at zero entries (valid for q > 1).
    The ratio form keeps large orders overflow-free (each ratio is <= 1)."""
    a = np.abs(z)
    nq = lq_norm(z, q)
    return np.sign(z) * (a / nq) ** (q - 1.0)


def ccp_verify(
    A,
    q: float,
    init: np.ndarray | None = None,
    cfg: SolverConfig = SolverConfig(),
    extra_inits: int = 5,
    max_rounds: int = 200,
    ftol: float = 1e-8,
) -> VerificationResult:
    """Convex-concave search for max ||z||_q over {Az = 0, ||z||_1 <= 1}.

    Each round maximizes the tangent linearization of ||z||_q by one LP and
    accepts the candidate only if the objective does not decrease, so the
    trace is non-decreasing by construction.  Runs from ``init`` (default:
    the linf witness) plus ``extra_inits`` random kernel vectors; the best
    final value wins.  The result is a feasible lower bound on the true
    maximum, hence k_max is tagged HEURISTIC_UPPER.
    """
    A = as_matrix(A)
    q = check_q(q)
    if not (1.0 < q < math.inf):
        raise ValueError(f"CCP verification needs finite q > 1, got {q}")
    m, N = A.shape
    basis = kernel_basis(A)
    if basis.shape[1] == 0:
        return _trivial_kernel_result(q, N)

    def random_kernel_vector(tag: int) -> np.ndarray:
        rng = np.random.default_rng([cfg.seed, tag])
        v = basis @ rng.standard_normal(basis.shape[1])
        return v / np.abs(v).sum()

    if init is None:
        init = verify_linf(A, cfg).witness
    init = np.asarray(init, dtype=np.float64)
    if not np.any(init):
        # gradient undefined at 0
        init = random_kernel_vector(10_000)
    inits = [init] + [random_kernel_vector(i) for i in range(extra_inits)]

    best_val = -math.inf
    best_z = None
    best_trace = None
    for z0 in inits:
        z = z0
        val = lq_norm(z, q)
        trace = [val]
        for _ in range(max_rounds):
            g = _lq_gradient(z, q)
            Z, _, statuses, _, _ = solve_lp_batch(A, None, g, 1.0, cfg)
            if statuses[0] != "converged":
                break
            cand = Z[:, 0]
            cand_val = lq_norm(cand, q)
            if cand_val < val:
                break  # minorant maximization cannot certify further progress
            improved = cand_val - val
            z, val = cand, cand_val
            trace.append(val)
            if improved < ftol:
                break
        if val > best_val:
            best_val, best_z, best_trace = val, z, trace

    l1 = float(np.abs(best_z).sum())
    if l1 > 0:
        best_z = best_z / l1
    opt = lq_norm(best_z, q)
    k_max = min(strict_floor(sparsity_level_bound(opt, q)), N)
    return VerificationResult(
        q=q,
        opt_value=opt,
        k_max=k_max,
        certificate=HEURISTIC_UPPER,
        witness=best_z,
        trace=np.asarray(best_trace),
    )


def max_recoverable_sparsity(
    A, q: float = math.inf, method: str = "linf", cfg: SolverConfig = SolverConfig()
) -> int:
    """Certified (linf) or heuristic (ccp) maximal k for exact BP recovery."""
    if method == "linf":
        return verify_linf(A, cfg).k_max
    if method == "ccp":
        return ccp_verify(A, q, cfg=cfg).k_max
    raise ValueError(f"method must be 'linf' or 'ccp', got {method!r}")
