"""Numba backend: jitted twins of the kernels in ``_numpy.py``.

Bodies are loop-style equivalents of the numpy reference; reductions
accumulate sequentially, so results can differ from the numpy backend in the
last bits but agree to solver tolerances (see the backend parity test).
"""

import numpy as np
from numba import njit, prange

STAT_STATIONARY = 0
STAT_MAXITER = 1
STAT_NO_DESCENT = 2

_F = {"cache": True, "fastmath": False}


@njit(**_F)
def l1_project(v, r):
    n = v.shape[0]
    s = 0.0
    for i in range(n):
        s += abs(v[i])
    if s <= r:
        return v.copy()
    out = np.zeros(n)
    if r <= 0.0:
        return out
    a = np.sort(np.abs(v))  # ascending
    csum = 0.0
    k = 0
    theta = 0.0
    for idx in range(n - 1, -1, -1):
        k += 1
        csum += a[idx]
        if a[idx] - (csum - r) / k > 0.0:
            theta = (csum - r) / k
    for i in range(n):
        mag = abs(v[i]) - theta
        if mag > 0.0:
            out[i] = mag if v[i] > 0.0 else -mag
    return out


@njit(parallel=True, **_F)
def l1_project_cols(V, r):
    out = np.empty_like(V)
    for j in prange(V.shape[1]):
        col = np.empty(V.shape[0])
        for i in range(V.shape[0]):
            col[i] = V[i, j]
        proj = l1_project(col, r)
        for i in range(V.shape[0]):
            out[i, j] = proj[i]
    return out


@njit(**_F)
def soft_threshold(v, tau):
    out = np.empty_like(v)
    for i in range(v.shape[0]):
        mag = abs(v[i]) - tau
        if mag > 0.0:
            out[i] = mag if v[i] > 0.0 else -mag
        else:
            out[i] = 0.0
    return out


@njit(**_F)
def lq_norm_fast(z, q):
    mx = 0.0
    for i in range(z.shape[0]):
        a = abs(z[i])
        if a > mx:
            mx = a
    if mx == 0.0:
        return 0.0
    if np.isinf(q):
        return mx
    if q == 1.0:
        s = 0.0
        for i in range(z.shape[0]):
            s += abs(z[i])
        return s
    s = 0.0
    for i in range(z.shape[0]):
        s += (abs(z[i]) / mx) ** q
    return mx * s ** (1.0 / q)


@njit(**_F)
def _abs_sum(z):
    s = 0.0
    for i in range(z.shape[0]):
        s += abs(z[i])
    return s


@njit(**_F)
def retract_to_sphere(z, q, R, cycles=60, tol=1e-9):
    nq = lq_norm_fast(z, q)
    if nq == 0.0:
        return z.copy()
    z = z / nq
    for _ in range(cycles):
        if _abs_sum(z) <= R * (1.0 + tol):
            return z
        z = l1_project(z, R)
        nq = lq_norm_fast(z, q)
        if nq == 0.0:
            return z
        z = z / nq
    base = z
    best = z
    lo = 0.0
    hi = R
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        w = l1_project(base, mid)
        nq = lq_norm_fast(w, q)
        if nq == 0.0:
            lo = mid
            continue
        w = w / nq
        if _abs_sum(w) <= R * (1.0 + tol):
            best = w
            lo = mid
        else:
            hi = mid
    return best


@njit(parallel=True, **_F)
def cmsv_pg_trials(AtA, Z0, q, R, L, max_iter, tol_move, f_floor):
    n_trials = Z0.shape[0]
    N = Z0.shape[1]
    Z = np.zeros((n_trials, N))
    fvals = np.full(n_trials, np.inf)
    iters = np.zeros(n_trials, dtype=np.int64)
    status = np.full(n_trials, STAT_NO_DESCENT, dtype=np.int64)
    for i in prange(n_trials):
        z = retract_to_sphere(Z0[i].copy(), q, R)
        if lq_norm_fast(z, q) < 0.5:
            continue
        d = AtA @ z
        f = z @ d
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
                    ft = zt @ dt
                    sq = 0.0
                    for jj in range(N):
                        diff = zt[jj] - z[jj]
                        sq += diff * diff
                    if ft <= f - 1e-4 * sq / step:
                        accepted = True
                        d = dt
                        break
                step *= 0.5
            if not accepted:
                zt = retract_to_sphere(z - (1.0 / L) * g, q, R)
                if lq_norm_fast(zt, q) > 0.5:
                    dt = AtA @ zt
                    ft = zt @ dt
                    if ft < f - 1e-15 * max(1.0, abs(f)):
                        z = zt
                        f = ft
                        d = dt
                        continue
                st = STAT_NO_DESCENT
                break
            sq = 0.0
            for jj in range(N):
                diff = zt[jj] - z[jj]
                sq += diff * diff
            move = np.sqrt(sq)
            z = zt
            f = ft
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


@njit(**_F)
def dr_lp_chunk(A, P, b, C, r, t, relax, W, U, n_iter):
    m = A.shape[0]
    K = W.shape[1]
    X = W.copy()
    for _ in range(n_iter):
        V = W - U + t * C
        AV = A @ V
        for jj in range(m):
            for kk in range(K):
                AV[jj, kk] -= b[jj]
        X = V - P @ AV
        XB = relax * X + (1.0 - relax) * W
        W[:, :] = l1_project_cols(XB + U, r)
        U += XB - W
    return X


@njit(**_F)
def _ball_theta(wh, ev, eps2, feas_gap):
    if eps2 <= feas_gap * (1.0 + 1e-12) + 1e-300:
        return -1.0
    lo = 0.0
    hi = 1.0
    for _ in range(200):
        val = 0.0
        for j in range(wh.shape[0]):
            den = 1.0 + hi * ev[j]
            val += wh[j] * wh[j] / (den * den)
        if val <= eps2:
            break
        hi *= 4.0
    for _ in range(160):
        mid = 0.5 * (lo + hi)
        val = 0.0
        for j in range(wh.shape[0]):
            den = 1.0 + mid * ev[j]
            val += wh[j] * wh[j] / (den * den)
        if val > eps2:
            lo = mid
        else:
            hi = mid
    return hi


@njit(**_F)
def bp_dr_chunk(A, At, Um, ev, y, eps, feas_gap, t, relax, w, u, n_iter):
    eps2 = eps * eps
    m = ev.shape[0]
    x = w.copy()
    ev_max = 0.0
    for j in range(m):
        if ev[j] > ev_max:
            ev_max = ev[j]
    for _ in range(n_iter):
        v = w - u
        w0 = A @ v - y
        wh = Um.T @ w0
        phi0 = 0.0
        for j in range(m):
            phi0 += wh[j] * wh[j]
        if phi0 <= eps2 or phi0 <= 0.0:
            x = v.copy()
        else:
            theta = _ball_theta(wh, ev, eps2, feas_gap)
            coef = np.empty(m)
            if theta < 0.0:
                for j in range(m):
                    if ev[j] > 1e-12 * ev_max:
                        coef[j] = wh[j] / ev[j]
                    else:
                        coef[j] = 0.0
            else:
                for j in range(m):
                    coef[j] = theta * wh[j] / (1.0 + theta * ev[j])
            x = v - At @ (Um @ coef)
        xb = relax * x + (1.0 - relax) * w
        w[:] = soft_threshold(xb + u, t)
        u += xb - w
    return x


@njit(**_F)
def fista_lasso(AtA, Aty, yty, lam, L, z0, max_iter, tol):
    x = z0.copy()
    dx = AtA @ x
    Fx = 0.5 * (x @ dx) - x @ Aty + 0.5 * yty + lam * _abs_sum(x)
    yv = x.copy()
    tk = 1.0
    resid = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        g = AtA @ yv - Aty
        zc = soft_threshold(yv - g / L, lam / L)
        dz = AtA @ zc
        Fz = 0.5 * (zc @ dz) - zc @ Aty + 0.5 * yty + lam * _abs_sum(zc)
        if Fz <= Fx:
            x_new = zc
            Fx_new = Fz
            dx_new = dz
        else:
            x_new = x
            Fx_new = Fx
            dx_new = dx
        tk1 = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        yv = x_new + (tk / tk1) * (zc - x_new) + ((tk - 1.0) / tk1) * (x_new - x)
        x = x_new
        Fx = Fx_new
        dx = dx_new
        tk = tk1
        if it % 10 == 0 or it == max_iter:
            gx = dx - Aty
            px = soft_threshold(x - gx / L, lam / L)
            sq = 0.0
            for jj in range(x.shape[0]):
                diff = x[jj] - px[jj]
                sq += diff * diff
            resid = L * np.sqrt(sq)
            if resid <= tol:
                break
    return x, it, resid


@njit(**_F)
def pdhg_ds_chunk(B, c0, lam, tau, sig, z, p, zbar, n_iter):
    for _ in range(n_iter):
        p[:] = soft_threshold(p + sig * (B @ zbar) - sig * c0, sig * lam)
        znew = soft_threshold(z - tau * (B @ p), tau)
        zbar[:] = 2.0 * znew - z
        z[:] = znew
    return z
