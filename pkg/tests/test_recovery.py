import math

import numpy as np
import pytest

from qratio.cmsv import CmsvEstimate
from qratio.optim import SolverConfig, soft_threshold
from qratio.recovery import (
    COMPRESSIBLE,
    EXACT_SPARSE,
    InfeasibleError,
    NoiseModel,
    NotApplicableError,
    SMismatchError,
    bound_exact_sparse,
    bound_compressible,
    required_sparsity_cap,
    solve_bp,
    solve_ds,
    solve_lasso,
)

cp = pytest.importorskip("cvxpy")


def cvx_bp(A, y, eps):
    z = cp.Variable(A.shape[1])
    cons = [cp.norm2(y - A @ z) <= eps] if eps > 0 else [A @ z == y]
    prob = cp.Problem(cp.Minimize(cp.norm1(z)), cons)
    prob.solve(solver=cp.CLARABEL)
    return z.value, prob.value


def cvx_ds(A, y, lam):
    z = cp.Variable(A.shape[1])
    prob = cp.Problem(cp.Minimize(cp.norm1(z)), [cp.norm_inf(A.T @ (y - A @ z)) <= lam])
    prob.solve(solver=cp.CLARABEL)
    return z.value, prob.value


def cvx_lasso(A, y, lam):
    z = cp.Variable(A.shape[1])
    prob = cp.Problem(cp.Minimize(0.5 * cp.sum_squares(y - A @ z) + lam * cp.norm1(z)))
    prob.solve(solver=cp.CLARABEL)
    return z.value, prob.value


def sparse_instance(rng, m, N, k, noise=0.0):
    A = rng.standard_normal((m, N)) / np.sqrt(m)
    x = np.zeros(N)
    sup = rng.choice(N, k, replace=False)
    x[sup] = rng.standard_normal(k) + np.sign(rng.standard_normal(k))
    w = rng.standard_normal(m)
    w = noise * w / np.linalg.norm(w) if noise > 0 else np.zeros(m)
    return A, x, A @ x + w


def test_bp_identity_eps0():
    y = np.array([0.3, -1.2, 0.0, 2.0])
    res = solve_bp(np.eye(4), y, 0.0)
    assert res.converged
    np.testing.assert_allclose(res.x_hat, y, atol=1e-9)


def test_bp_matches_cvx():
    rng = np.random.default_rng(30)
    for eps in (0.0, 0.1):
        A, x, y = sparse_instance(rng, 5, 10, 2, noise=0.05 if eps else 0.0)
        res = solve_bp(A, y, eps)
        assert res.converged
        _, val = cvx_bp(A, y, eps)
        assert np.abs(res.x_hat).sum() == pytest.approx(val, rel=1e-6, abs=1e-7)
        assert np.linalg.norm(y - A @ res.x_hat) <= eps + 1e-7 * (1 + np.linalg.norm(y))


def test_bp_feasibility_and_minimality():
    rng = np.random.default_rng(31)
    for _ in range(5):
        A, x, y = sparse_instance(rng, 12, 24, 3, noise=0.05)
        eps = 0.08
        res = solve_bp(A, y, eps)
        assert res.converged
        assert np.linalg.norm(y - A @ res.x_hat) <= eps + 1e-7 * (1 + np.linalg.norm(y))
        # objective no worse than at the (feasible) truth
        assert np.abs(res.x_hat).sum() <= np.abs(x).sum() + 1e-6


def test_bp_infeasible():
    A = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    y = np.array([1.0, 1.0, 0.0])  # not in range(A) closely enough for eps=0
    with pytest.raises(InfeasibleError):
        solve_bp(A, y, 0.0)


def test_ds_zero_when_level_large():
    rng = np.random.default_rng(32)
    A, x, y = sparse_instance(rng, 6, 12, 2)
    lam = float(np.abs(A.T @ y).max()) * 1.01
    res = solve_ds(A, y, lam)
    assert res.converged
    np.testing.assert_array_equal(res.x_hat, np.zeros(12))


def test_ds_orthonormal_exact():
    rng = np.random.default_rng(33)
    Q, _ = np.linalg.qr(rng.standard_normal((8, 4)))
    x = np.array([1.0, 0.0, -2.0, 0.0])
    y = Q @ x
    res = solve_ds(Q, y, 1e-10)
    assert res.converged
    np.testing.assert_allclose(Q.T @ (y - Q @ res.x_hat), 0.0, atol=1e-8)


def test_ds_matches_cvx():
    rng = np.random.default_rng(34)
    A, x, y = sparse_instance(rng, 6, 12, 2, noise=0.05)
    lam = 0.1
    res = solve_ds(A, y, lam)
    assert res.converged
    _, val = cvx_ds(A, y, lam)
    assert np.abs(res.x_hat).sum() == pytest.approx(val, rel=1e-5, abs=1e-6)
    assert np.abs(A.T @ (y - A @ res.x_hat)).max() <= lam + 1e-6


def test_lasso_scalar_closed_form():
    A = np.array([[1.0]])
    for y0, lam in [(2.0, 0.5), (-1.0, 0.25), (0.3, 0.5)]:
        res = solve_lasso(A, np.array([y0]), lam)
        expect = soft_threshold(np.array([y0]), lam)
        np.testing.assert_allclose(res.x_hat, expect, atol=1e-9)


def test_lasso_zero_and_least_squares_limits():
    rng = np.random.default_rng(35)
    A, x, y = sparse_instance(rng, 8, 5, 2)  # injective (m > N)
    res = solve_lasso(A, y, 0.0)
    ls = np.linalg.lstsq(A, y, rcond=None)[0]
    np.testing.assert_allclose(res.x_hat, ls, atol=1e-6)
    lam = float(np.abs(A.T @ y).max()) + 0.1
    res = solve_lasso(A, y, lam)
    np.testing.assert_array_equal(res.x_hat, np.zeros(5))


def test_lasso_matches_cvx_and_kkt():
    rng = np.random.default_rng(36)
    A, x, y = sparse_instance(rng, 10, 20, 3, noise=0.1)
    lam = 0.05
    res = solve_lasso(A, y, lam)
    assert res.converged
    zc, val = cvx_lasso(A, y, lam)
    obj = 0.5 * np.linalg.norm(y - A @ res.x_hat) ** 2 + lam * np.abs(res.x_hat).sum()
    assert obj == pytest.approx(val, rel=1e-7, abs=1e-9)
    v = A.T @ (y - A @ res.x_hat)
    scale = max(1.0, np.abs(A.T @ y).max())
    assert np.abs(v).max() <= lam + 1e-6 * scale
    sup = np.abs(res.x_hat) > 1e-7
    np.testing.assert_allclose(v[sup], lam * np.sign(res.x_hat[sup]), atol=1e-6 * scale)


def test_residual_cone_property():
    # BP/DS residuals concentrate on the true support: ||h_Sc||_1 <= ||h_S||_1
    rng = np.random.default_rng(37)
    tol = 10 * 1e-7
    for _ in range(5):
        k = 2
        A, x, y = sparse_instance(rng, 12, 20, k, noise=0.05)
        S = np.abs(x) > 0
        for res in (solve_bp(A, y, 0.08), solve_ds(A, y, 0.1)):
            h = res.x_hat - x
            assert np.abs(h[~S]).sum() <= np.abs(h[S]).sum() + tol
    # lasso variant with the (1+kappa)/(1-kappa) factor
    kappa = 0.5
    for _ in range(5):
        A, x, y = sparse_instance(rng, 12, 20, 2)
        lam = 0.2
        w = rng.standard_normal(12) * 0.01
        w *= kappa * lam / max(np.abs(A.T @ w).max(), 1e-12)
        y = A @ x + w
        res = solve_lasso(A, y, lam)
        h = res.x_hat - x
        S = np.abs(x) > 0
        assert np.abs(h[~S]).sum() <= (1 + kappa) / (1 - kappa) * np.abs(h[S]).sum() + tol


def test_bound_holds_with_oracle_cmsv_tiny():
    # on tiny instances the cap constant comes from the dense-sampling oracle,
    # so a violated bound would indicate a solver or oracle defect
    from qratio.cmsv import brute_force_cmsv

    rng = np.random.default_rng(39)
    eps, q, k = 0.2, 2.0, 1
    s = required_sparsity_cap("l2_ball", EXACT_SPARSE, k, q)
    checked = 0
    for i in range(10):
        # 5x6 keeps the kernel one-dimensional, so the cap excludes it for
        # about half the draws and rho stays positive
        A = rng.standard_normal((5, 6)) / np.sqrt(5)
        rho_val = brute_force_cmsv(A, q, s, n_samples=100_000, seed=i)
        if rho_val <= 1e-6:
            continue
        x = np.zeros(6)
        x[rng.integers(6)] = 1.0 + rng.random()
        w = rng.standard_normal(5)
        w *= eps / np.linalg.norm(w)
        res = solve_bp(A, A @ x + w, eps)
        assert res.converged
        rho = fake_rho(rho_val, q, s)
        rep = bound_exact_sparse(rho, k, q, NoiseModel.l2_ball(eps))
        checked += 1
        assert np.linalg.norm(res.x_hat - x) <= rep.bound_lq
    assert checked >= 3


def test_objective_never_worse_than_truth():
    # whenever the true x is feasible, the solver's objective cannot exceed
    # the objective at x
    rng = np.random.default_rng(38)
    for _ in range(5):
        A, x, y = sparse_instance(rng, 10, 18, 2, noise=0.03)
        res = solve_bp(A, y, 0.05)
        assert np.abs(res.x_hat).sum() <= np.abs(x).sum() + 1e-6
        lam_feas = float(np.abs(A.T @ (y - A @ x)).max()) * 1.001
        res = solve_ds(A, y, lam_feas)
        assert np.abs(res.x_hat).sum() <= np.abs(x).sum() + 1e-6
        lam = 0.1
        res = solve_lasso(A, y, lam)
        obj = lambda z: 0.5 * np.linalg.norm(y - A @ z) ** 2 + lam * np.abs(z).sum()
        assert obj(res.x_hat) <= obj(x) + 1e-8


def fake_rho(value, q, s):
    return CmsvEstimate(
        value=value,
        minimizer=np.zeros(2),
        trial_values=np.array([value]),
        q=q,
        s=s,
    )


def test_required_sparsity_cap():
    assert required_sparsity_cap("l2_ball", EXACT_SPARSE, 2, 2.0) == 8.0
    assert required_sparsity_cap("l2_ball", COMPRESSIBLE, 2, 2.0) == 32.0
    assert required_sparsity_cap("l2_ball", EXACT_SPARSE, 3, math.inf) == 6.0
    assert required_sparsity_cap("lasso_pen", EXACT_SPARSE, 1, 2.0, kappa=0.5) == 16.0


def test_bound_exact_sparse_values():
    # BP: rho=.5, k=2, q=2, eps=1 -> lq 4, l1 8 sqrt2
    rho = fake_rho(0.5, 2.0, required_sparsity_cap("l2_ball", EXACT_SPARSE, 2, 2.0))
    rep = bound_exact_sparse(rho, 2, 2.0, NoiseModel.l2_ball(1.0))
    assert rep.bound_lq == pytest.approx(4.0)
    assert rep.bound_l1 == pytest.approx(8 * math.sqrt(2))
    assert rep.caveat_flags  # upper-bound direction recorded
    # eps = 0 collapses both to zero
    rep = bound_exact_sparse(rho, 2, 2.0, NoiseModel.l2_ball(0.0))
    assert rep.bound_lq == 0.0 and rep.bound_l1 == 0.0
    # DS: rho=1, k=1, q=2, lam=1 -> 4 and 8
    rho = fake_rho(1.0, 2.0, required_sparsity_cap("correlated_inf", EXACT_SPARSE, 1, 2.0))
    rep = bound_exact_sparse(rho, 1, 2.0, NoiseModel.correlated_inf(1.0))
    assert rep.bound_lq == pytest.approx(4.0)
    assert rep.bound_l1 == pytest.approx(8.0)


def test_bound_exact_sparse_errors():
    rho = fake_rho(0.5, 2.0, 8.0)
    with pytest.raises(SMismatchError):
        bound_exact_sparse(rho, 1, 2.0, NoiseModel.l2_ball(1.0))  # s should be 4
    with pytest.raises(SMismatchError):
        bound_exact_sparse(fake_rho(0.5, 3.0, 8.0), 2, 2.0, NoiseModel.l2_ball(1.0))
    with pytest.raises(NotApplicableError):
        bound_exact_sparse(fake_rho(0.0, 2.0, 8.0), 2, 2.0, NoiseModel.l2_ball(1.0))


def test_bound_compressible_values():
    # BP: rho=1, k=1, q=2, eps=0, sigma_k=3 -> lq 3, l1 12
    rho = fake_rho(1.0, 2.0, required_sparsity_cap("l2_ball", COMPRESSIBLE, 1, 2.0))
    rep = bound_compressible(rho, 1, 2.0, NoiseModel.l2_ball(0.0), sigma_k=3.0)
    assert rep.bound_lq == pytest.approx(3.0)
    assert rep.bound_l1 == pytest.approx(12.0)
    assert rep.bound_lq_sharp == pytest.approx(3.0)
    # lasso second term: kappa=.5, lam=0, sigma_k=1 -> l1 bound 8
    rho = fake_rho(1.0, 2.0, required_sparsity_cap("lasso_pen", COMPRESSIBLE, 1, 2.0, 0.5))
    rep = bound_compressible(rho, 1, 2.0, NoiseModel.lasso_pen(0.0, 0.5), sigma_k=1.0)
    assert rep.bound_l1 == pytest.approx(8.0)
    # sigma_k = 0 reduces to the exact-sparse forms with the larger cap
    rho = fake_rho(0.5, 2.0, required_sparsity_cap("l2_ball", COMPRESSIBLE, 2, 2.0))
    rep = bound_compressible(rho, 2, 2.0, NoiseModel.l2_ball(1.0), sigma_k=0.0)
    assert rep.bound_lq == pytest.approx(4.0)
    assert rep.bound_l1 == pytest.approx(8 * math.sqrt(2))


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel("gaussian", 1.0)
    with pytest.raises(ValueError):
        NoiseModel.l2_ball(-1.0)
    with pytest.raises(ValueError):
        NoiseModel.lasso_pen(1.0, 1.5)
    with pytest.raises(ValueError):
        NoiseModel("l2_ball", 1.0, kappa=0.5)
