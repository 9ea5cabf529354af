"""Optimization primitives: projections, proximal operators, a linear-program
solver over {Az = b, ||z||_1 <= r}, and singular-value helpers.

The LP solver runs over-relaxed Douglas-Rachford sweeps (alternating the
affine projection with the l1-ball projection, the objective folded into the
affine prox step) and certifies the result with a duality gap; whenever the
iterate identifies a candidate optimal face it attempts an exact vertex solve,
which usually terminates the iteration early at machine precision.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .sparsity import as_matrix, as_signal

__all__ = [
    "TrivialKernelError",
    "InfeasibleError",
    "LpProblem",
    "SolverConfig",
    "LpResult",
    "project_l1_ball",
    "soft_threshold",
    "kernel_basis",
    "project_nullspace",
    "extreme_singular_values",
    "solve_lp",
    "solve_lp_batch",
]

# rank cutoff: singular values below this multiple of sigma_max count as zero
_RANK_RTOL = 1e-10


class TrivialKernelError(ValueError):
    """The matrix has full column rank, so its kernel is {0}."""


class InfeasibleError(ValueError):
    """The constraint set is empty."""


@dataclass(frozen=True)
class LpProblem:
    """maximize c'z  subject to  A_eq z = b_eq and ||z||_1 <= r."""

    c: np.ndarray
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    r: float = 1.0

    def __post_init__(self):
        c = as_signal(self.c)
        object.__setattr__(self, "c", c)
        if self.a_eq is not None:
            a = as_matrix(self.a_eq)
            if a.shape[1] != c.size:
                raise ValueError("a_eq and c dimensions disagree")
            b = np.zeros(a.shape[0]) if self.b_eq is None else as_signal(self.b_eq)
            if b.size != a.shape[0]:
                raise ValueError("a_eq and b_eq dimensions disagree")
            object.__setattr__(self, "a_eq", a)
            object.__setattr__(self, "b_eq", b)
        elif self.b_eq is not None:
            raise ValueError("b_eq given without a_eq")
        if self.r < 0:
            raise ValueError("l1 radius must be nonnegative")


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 50_000
    tol_primal: float = 1e-8
    tol_dual: float = 1e-7
    step: float | None = None  # None: scaled from the problem data
    relax: float = 1.7
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.tol_primal <= 0 or self.tol_dual <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class LpResult:
    z: np.ndarray
    value: float
    status: str  # "converged" | "max_iter"
    iterations: int
    gap: float


def project_l1_ball(z, r: float) -> np.ndarray:
    """argmin_{||w||_1 <= r} ||w - z||_2, exact via sorted thresholding."""
    z = as_signal(z)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return kernels.l1_project(z, float(r))


def soft_threshold(z, tau: float) -> np.ndarray:
    """Entrywise sign(z_i) * max(|z_i| - tau, 0)."""
    z = as_signal(z)
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    return kernels.soft_threshold(z, float(tau))


def kernel_basis(A) -> np.ndarray:
    """Orthonormal basis of ker A as an N x d array (d may be 0).

    Rank is decided by a singular-value cutoff at 1e-10 * sigma_max.
    """
    A = as_matrix(A)
    _, svals, Vt = np.linalg.svd(A, full_matrices=True)
    cutoff = _RANK_RTOL * (svals[0] if svals.size else 0.0)
    rank = int(np.sum(svals > cutoff))
    return Vt[rank:].T.copy()


def project_nullspace(z, A, basis: np.ndarray | None = None) -> np.ndarray:
    """Orthogonal projection of z onto {w : Aw = 0}.

    Pass ``basis`` (from :func:`kernel_basis`) to reuse the factorization.

    Raises
    ------
    TrivialKernelError
        If A has full column rank.
    """
    z = as_signal(z)
    if basis is None:
        basis = kernel_basis(A)
    if basis.shape[1] == 0:
        raise TrivialKernelError("matrix has trivial kernel")
    return basis @ (basis.T @ z)


def extreme_singular_values(M) -> tuple[float, float]:
    """(sigma_max, sigma_min) of a nonempty matrix via full SVD."""
    M = as_matrix(M)
    svals = np.linalg.svd(M, compute_uv=False)
    return float(svals[0]), float(svals[-1])


class _AffineProjector:
    """Cached least-squares machinery for {z : Az = b} projections and for
    recovering dual multipliers."""

    def __init__(self, A: np.ndarray):
        self.A = np.ascontiguousarray(A)
        gram = A @ A.T
        # pseudo-inverse through eigendecomposition keeps rank-deficient rows
        # harmless
        ev, U = np.linalg.eigh(gram)
        cutoff = max(ev[-1], 0.0) * 1e-14
        inv = np.where(ev > cutoff, 1.0 / np.maximum(ev, 1e-300), 0.0)
        self.gram_pinv = (U * inv) @ U.T
        self.P = np.ascontiguousarray(A.T @ self.gram_pinv)  # N x m

    def range_distance(self, b: np.ndarray) -> float:
        """Distance from b to range(A) (0 when the system is consistent)."""
        resid = b - self.A @ (self.P @ b)
        return float(np.linalg.norm(resid))


def _face_polish(A, b, c, w_col, x_col, r, repairs: int = 5):
    """Exact solve on the face suggested by the current iterate.

    The face is {z: z_Sc = 0, A z = b, sign pattern sig, ||z||_1 = r}.  A
    consistent dual solve A_S' lam + theta sig = c_S with theta >= 0 and
    |c - A'lam| <= theta off the face certifies the whole face optimal (its
    objective is constant, lam'b + theta r); the returned point is the face
    point nearest the ball iterate.  Splitting iterates can drag spurious
    coordinates in their support, which show up as the worst-fitting dual
    equations; those are dropped and the solve repeated a few times.
    Returns (z, value, certified) or None.
    """
    m, N = A.shape
    scale = max(float(np.abs(w_col).max()), 1e-300)
    S = np.flatnonzero(np.abs(w_col) > 1e-7 * scale)
    cs = max(1.0, float(np.abs(c).max()))
    rhs = np.concatenate([b, [r]])
    best = None
    for _ in range(repairs):
        if len(S) == 0:
            break
        sig = np.sign(x_col[S] + w_col[S])
        if np.any(sig == 0.0):
            break
        D = np.hstack([A[:, S].T, sig[:, None]])
        sol, *_ = np.linalg.lstsq(D, c[S], rcond=None)
        lam, theta = sol[:m], sol[m]
        dual_resid = np.abs(D @ sol - c[S])
        M = np.vstack([A[:, S], sig])
        corr, *_ = np.linalg.lstsq(M, rhs - M @ w_col[S], rcond=None)
        zS = w_col[S] + corr
        primal_ok = (
            np.linalg.norm(M @ zS - rhs) <= 1e-9 * max(1.0, r)
            and np.all(zS * sig >= -1e-9 * max(1.0, r))
        )
        if primal_ok:
            z = np.zeros(N)
            z[S] = zS
            value = float(c @ z)
            if best is None or value > best[1]:
                best = (z, value, False)
            if dual_resid.max() <= 1e-9 * cs and theta >= -1e-11 * cs:
                off = np.abs(c - A.T @ lam)
                if np.all(off <= theta + 1e-9 * cs):
                    return z, value, True
        if dual_resid.size == 0 or dual_resid.max() <= 1e-9 * cs:
            break
        S = np.delete(S, int(np.argmax(dual_resid)))
    return best


def solve_lp_batch(
    a_eq,
    b_eq,
    C,
    r: float,
    cfg: SolverConfig = SolverConfig(),
    chunk: int = 100,
):
    """Solve max c'z over {A z = b, ||z||_1 <= r} for every column c of C.

    Returns (Z, values, statuses, iterations, gaps).
    """
    C = np.asarray(C, dtype=np.float64)
    if C.ndim == 1:
        C = C[:, None]
    C = np.ascontiguousarray(C)
    N, K = C.shape
    r = float(r)

    if a_eq is None or np.asarray(a_eq).size == 0:
        # plain l1-ball LP: optimum r * ||c||_inf at a signed spike
        Z = np.zeros((N, K))
        values = np.empty(K)
        for j in range(K):
            i = int(np.argmax(np.abs(C[:, j])))
            if C[i, j] != 0.0:
                Z[i, j] = r if C[i, j] > 0 else -r
            values[j] = float(np.abs(C[:, j]).max() * r)
        return Z, values, ["converged"] * K, np.zeros(K, dtype=int), np.zeros(K)

    A = np.ascontiguousarray(as_matrix(a_eq))
    m, N2 = A.shape
    if N2 != N:
        raise ValueError("objective and equality dimensions disagree")
    b = np.zeros(m) if b_eq is None else as_signal(b_eq)
    homogeneous = bool(np.all(b == 0.0))

    proj = _AffineProjector(A)
    if proj.range_distance(b) > cfg.tol_primal * max(1.0, float(np.linalg.norm(b))):
        raise InfeasibleError("equality system A z = b is inconsistent")

    c_norms = np.linalg.norm(C, axis=0)
    t = cfg.step
    if t is None:
        t = 0.15 * max(r, 1e-30) / max(float(np.median(c_norms)), 1e-30)

    W = np.zeros((N, K))
    U = np.zeros((N, K))

    Z = np.zeros((N, K))
    values = np.full(K, -np.inf)
    statuses = ["max_iter"] * K
    iterations = np.zeros(K, dtype=int)
    gaps = np.full(K, np.inf)
    active = np.arange(K)
    Wa, Ua, Ca = W, U, C
    it_done = 0

    while active.size and it_done < cfg.max_iter:
        n_it = min(chunk, cfg.max_iter - it_done)
        X = kernels.dr_lp_chunk(A, proj.P, b, Ca, r, t, cfg.relax, Wa, Ua, n_it)
        it_done += n_it

        V = Wa - Ua + t * Ca
        resid = A @ V - b[:, None]
        At_lam = (proj.P @ resid) / t
        lam_all = (proj.gram_pinv @ resid) / t
        done = []
        for idx in range(active.size):
            j = active[idx]
            x = X[:, idx]
            c = Ca[:, idx]
            l1 = float(np.abs(x).sum())
            zf = None
            if homogeneous:
                zf = x * (r / l1) if l1 > r else x
            elif l1 <= r * (1.0 + cfg.tol_primal):
                zf = x
            if zf is not None:
                val = float(c @ zf)
                if val > values[j]:
                    values[j] = val
                    Z[:, j] = zf
            ub = float(b @ lam_all[:, idx]) + r * float(np.max(np.abs(c - At_lam[:, idx])))
            gaps[j] = ub - values[j]
            have_incumbent = np.isfinite(values[j])
            tol = cfg.tol_dual * max(1.0, abs(values[j]) if have_incumbent else 1.0)
            if have_incumbent and gaps[j] <= tol:
                statuses[j] = "converged"
                iterations[j] = it_done
                done.append(idx)
                continue
            polished = _face_polish(A, b, c, Wa[:, idx], x, r)
            if polished is not None:
                z_p, val_p, certified = polished
                if val_p > values[j]:
                    values[j] = val_p
                    Z[:, j] = z_p
                if certified:
                    gaps[j] = 0.0
                if certified or ub - values[j] <= tol:
                    statuses[j] = "converged"
                    iterations[j] = it_done
                    done.append(idx)
        if done:
            keep = np.setdiff1d(np.arange(active.size), done)
            active = active[keep]
            Wa = np.ascontiguousarray(Wa[:, keep])
            Ua = np.ascontiguousarray(Ua[:, keep])
            Ca = np.ascontiguousarray(Ca[:, keep])

    for j in active:
        iterations[j] = it_done
    return Z, values, statuses, iterations, gaps


def solve_lp(problem: LpProblem, cfg: SolverConfig = SolverConfig()) -> LpResult:
    """Solve a single :class:`LpProblem`; see :func:`solve_lp_batch`."""
    Z, values, statuses, iterations, gaps = solve_lp_batch(
        problem.a_eq, problem.b_eq, problem.c, problem.r, cfg
    )
    return LpResult(
        z=Z[:, 0],
        value=float(values[0]),
        status=statuses[0],
        iterations=int(iterations[0]),
        gap=float(gaps[0]),
    )
