"""Pure-numpy backend for the hot iteration kernels.

Every function here has a numba twin in ``_numba.py`` with the same
signature and the same iteration math; keep the two in sync (the parity test
in the suite compares them).  Orders q are floats with ``inf`` meaning the
sup-norm; the zero vector is returned unchanged by the retraction and must be
rejected by callers.
"""

import numpy as np

# status codes shared by both backends
STAT_STATIONARY = 0
STAT_MAXITER = 1
STAT_NO_DESCENT = 2


def l1_project(v, r):
    """Euclidean projection onto the l1 ball of radius r (sort-based, exact)."""
    a = np.abs(v)
    if a.sum() <= r:
        return v.copy()
    if r <= 0.0:
        return np.zeros_like(v)
    u = np.sort(a)[::-1]
    css = np.cumsum(u) - r
    rho = 0
    for i in range(u.shape[0]):
        if u[i] - css[i] / (i + 1.0) > 0.0:
            rho = i + 1
    theta = css[rho - 1] / rho
    out = a - theta
    np.maximum(out, 0.0, out=out)
    return np.sign(v) * out


def l1_project_cols(V, r):
    """Project every column of V onto the l1 ball of radius r."""
    out = np.empty_like(V)
    for j in range(V.shape[1]):
        out[:, j] = l1_project(V[:, j], r)
    return out


def soft_threshold(v, tau):
    """Entrywise sign(v) * max(|v| - tau, 0)."""
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def lq_norm_fast(z, q):
    """l_q norm for q in (0, inf], overflow-safe; 0.0 for the zero vector."""
    a = np.abs(z)
    mx = a.max()
    if mx == 0.0:
        return 0.0
    if np.isinf(q):
        return float(mx)
    if q == 1.0:
        return float(a.sum())
    return float(mx * np.sum((a / mx) ** q) ** (1.0 / q))


def retract_to_sphere(z, q, R, cycles=60, tol=1e-9):
    """Map z to the l_q unit sphere intersected with {||.||_1 <= R(1+tol)}.

    Alternates sphere renormalization with l1-ball projection; if the
    alternation stalls, bisects the projection radius (a 1-sparse spike is
    always feasible for R >= 1).  The zero vector is returned unchanged.
    """
    nq = lq_norm_fast(z, q)
    if nq == 0.0:
        return z.copy()
    z = z / nq
    for _ in range(cycles):
        if np.abs(z).sum() <= R * (1.0 + tol):
            return z
        z = l1_project(z, R)
        nq = lq_norm_fast(z, q)
        if nq == 0.0:
            return z
        z = z / nq
    # stalled: shrink the projection radius until the renormalized point fits
    base = z
    best = z
    lo, hi = 0.0, R
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        w = l1_project(base, mid)
        nq = lq_norm_fast(w, q)
        if nq == 0.0:
            lo = mid
            continue
        w = w / nq
        if np.abs(w).sum() <= R * (1.0 + tol):
            best = w
            lo = mid
        else:
            hi = mid
    return best


def cmsv_pg_trials(AtA, Z0, q, R, L, max_iter, tol_move, f_floor):
    """Projected-gradient descent of z'AtA z on the sphere-cap set, one run
    per row of Z0.

    Returns (Z, fvals, iters, status) where fvals[i] is the final objective
    of trial i and status is one of the STAT_* codes.  Trials whose start
    retracts to zero get fval = inf.
    """
    n_trials, N = Z0.shape
    Z = np.zeros((n_trials, N))
    fvals = np.full(n_trials, np.inf)
    iters = np.zeros(n_trials, dtype=np.int64)
    status = np.full(n_trials, STAT_NO_DESCENT, dtype=np.int64)
    for i in range(n_trials):
        z = retract_to_sphere(Z0[i].copy(), q, R)
        if lq_norm_fast(z, q) < 0.5:
            continue
        d = AtA @ z
        f = float(z @ d)
        st = STAT_MAXITER
        it = 0
        while it < max_iter:
            it += 1
            g = 2.0 * d
            step = 4.0 / L
            accepted = False
            zt = z
            ft = f
            for _ in range(60):
                zt = retract_to_sphere(z - step * g, q, R)
                if lq_norm_fast(zt, q) > 0.5:
                    dt = AtA @ zt
                    ft = float(zt @ dt)
                    diff = zt - z
                    if ft <= f - 1e-4 * float(diff @ diff) / step:
                        accepted = True
                        d = dt
                        break
                step *= 0.5
            if not accepted:
                # sufficient-decrease failed near a kink: take any plain
                # descent at the natural step, else stop
                zt = retract_to_sphere(z - (1.0 / L) * g, q, R)
                if lq_norm_fast(zt, q) > 0.5:
                    dt = AtA @ zt
                    ft = float(zt @ dt)
                    if ft < f - 1e-15 * max(1.0, abs(f)):
                        z, f, d = zt, ft, dt
                        continue
                st = STAT_NO_DESCENT
                break
            move = float(np.sqrt(np.sum((zt - z) ** 2)))
            z, f = zt, ft
            if move <= tol_move:
                st = STAT_STATIONARY
                break
            if f <= f_floor:
                st = STAT_STATIONARY
                break
        Z[i] = z
        fvals[i] = f
        iters[i] = it
        status[i] = st
    return Z, fvals, iters, status


def dr_lp_chunk(A, P, b, C, r, t, relax, W, U, n_iter):
    """n_iter Douglas-Rachford sweeps on max <c,z> s.t. Az = b, ||z||_1 <= r,
    one problem per column of C; W, U are the splitting state (updated in
    place).  Returns the affine-feasible iterate X.

    P must equal A^T (A A^T)^{-1} so that v - P(Av - b) is the affine
    projection.
    """
    X = W.copy()
    for _ in range(n_iter):
        V = W - U + t * C
        X = V - P @ (A @ V - b[:, None])
        XB = relax * X + (1.0 - relax) * W
        W[:] = l1_project_cols(XB + U, r)
        U += XB - W
    return X


def bp_dr_chunk(A, At, Um, ev, y, eps, feas_gap, t, relax, w, u, n_iter):
    """n_iter Douglas-Rachford sweeps on min ||z||_1 s.t. ||Az - y||_2 <= eps.

    Um, ev: eigenvectors / eigenvalues of A A^T.  feas_gap is the squared
    distance from y to the range of A (the eps = 0 projection is the limit
    case, handled by the driver requiring feas_gap ~ 0).  w, u updated in
    place; returns the ball-feasible iterate x.
    """
    eps2 = eps * eps
    x = w.copy()
    for _ in range(n_iter):
        v = w - u
        w0 = A @ v - y
        wh = Um.T @ w0
        phi0 = float(wh @ wh)
        if phi0 <= eps2 or phi0 <= 0.0:
            x = v.copy()
        else:
            theta = _ball_theta(wh, ev, eps2, feas_gap)
            if theta < 0.0:
                # eps = 0: pseudo-inverse projection onto {Az = y}
                coef = np.where(ev > 1e-12 * ev.max(), wh / np.maximum(ev, 1e-300), 0.0)
            else:
                coef = theta * wh / (1.0 + theta * ev)
            x = v - At @ (Um @ coef)
        xb = relax * x + (1.0 - relax) * w
        w[:] = soft_threshold(xb + u, t)
        u += xb - w
    return x


def _ball_theta(wh, ev, eps2, feas_gap):
    """Solve sum wh_j^2/(1+theta*ev_j)^2 = eps2 for theta >= 0.

    Returns -1.0 when eps2 is not attainable above the range-distance floor
    (caller then uses the affine limit).
    """
    if eps2 <= feas_gap * (1.0 + 1e-12) + 1e-300:
        return -1.0
    lo = 0.0
    hi = 1.0
    for _ in range(200):
        val = float(np.sum(wh * wh / (1.0 + hi * ev) ** 2))
        if val <= eps2:
            break
        hi *= 4.0
    for _ in range(160):
        mid = 0.5 * (lo + hi)
        val = float(np.sum(wh * wh / (1.0 + mid * ev) ** 2))
        if val > eps2:
            lo = mid
        else:
            hi = mid
    return hi


def fista_lasso(AtA, Aty, yty, lam, L, z0, max_iter, tol):
    """Monotone accelerated proximal gradient for
    min 0.5||y - Az||^2 + lam ||z||_1, using only A^T A and A^T y.

    Returns (z, iters, resid) where resid is the fixed-point residual
    L * ||z - prox(z - grad/L)|| at exit.
    """

    def objective(z, d):
        return 0.5 * float(z @ d) - float(z @ Aty) + 0.5 * yty + lam * float(np.abs(z).sum())

    x = z0.copy()
    dx = AtA @ x
    Fx = objective(x, dx)
    yv = x.copy()
    tk = 1.0
    resid = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = AtA @ yv - Aty
        zc = soft_threshold(yv - g / L, lam / L)
        dz = AtA @ zc
        Fz = objective(zc, dz)
        if Fz <= Fx:
            x_new, Fx_new, dx_new = zc, Fz, dz
        else:
            x_new, Fx_new, dx_new = x, Fx, dx
        tk1 = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        yv = x_new + (tk / tk1) * (zc - x_new) + ((tk - 1.0) / tk1) * (x_new - x)
        x, Fx, dx, tk = x_new, Fx_new, dx_new, tk1
        if it % 10 == 0 or it == max_iter:
            gx = dx - Aty
            px = soft_threshold(x - gx / L, lam / L)
            resid = L * float(np.sqrt(np.sum((x - px) ** 2)))
            if resid <= tol:
                break
    return x, it, resid


def pdhg_ds_chunk(B, c0, lam, tau, sig, z, p, zbar, n_iter):
    """n_iter primal-dual sweeps on min ||z||_1 s.t. ||Bz - c0||_inf <= lam
    with symmetric B; state (z, p, zbar) updated in place."""
    for _ in range(n_iter):
        p[:] = soft_threshold(p + sig * (B @ zbar) - sig * c0, sig * lam)
        znew = soft_threshold(z - tau * (B @ p), tau)
        zbar[:] = 2.0 * znew - z
        z[:] = znew
    return z
