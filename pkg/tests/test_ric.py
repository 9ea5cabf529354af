import math

import numpy as np
import pytest

from qratio.ric import RicEstimate, estimate_ric, exhaustive_ric, ric_bound


def unit_columns(rng, m, N):
    A = rng.standard_normal((m, N))
    return A / np.linalg.norm(A, axis=0)


def test_orthonormal_columns_delta_zero_exactly():
    # Hadamard over a power-of-4 size scales by an exact power of two, so the
    # columns are orthonormal bitwise and the estimate must be exactly zero
    from scipy.linalg import hadamard

    A = hadamard(16).astype(float) / 4.0
    est = estimate_ric(A, 2, n_samples=200, seed=0)
    assert est.delta == 0.0
    assert exhaustive_ric(A, 2) == 0.0
    est = estimate_ric(np.eye(6), 3, n_samples=50)
    assert est.delta == 0.0


def test_estimate_deterministic_and_tagged():
    rng = np.random.default_rng(40)
    A = unit_columns(rng, 8, 12)
    a = estimate_ric(A, 2, n_samples=300, seed=7)
    b = estimate_ric(A, 2, n_samples=300, seed=7)
    assert a.delta == b.delta
    assert a.direction == "LOWER_BOUND"
    assert not a.degenerate


def test_exhaustive_dominates_monte_carlo():
    rng = np.random.default_rng(41)
    for trial in range(10):
        A = unit_columns(rng, 6, 8)
        exact = exhaustive_ric(A, 2)
        mc = estimate_ric(A, 2, n_samples=100, seed=trial).delta
        assert mc <= exact + 1e-12
    # full coverage reaches the exact value: C(5, 2) = 10 supports
    A = unit_columns(rng, 6, 5)
    exact = exhaustive_ric(A, 1)
    mc = estimate_ric(A, 1, n_samples=3000, seed=0).delta
    assert mc == pytest.approx(exact, abs=1e-14)


def test_monotone_in_samples_and_k():
    rng = np.random.default_rng(42)
    A = unit_columns(rng, 10, 14)
    deltas = [estimate_ric(A, 2, n_samples=n, seed=3).delta for n in (10, 50, 200, 800)]
    for a, b in zip(deltas, deltas[1:]):
        assert b >= a
    # nested supports under a shared seed make delta monotone in k
    dk = [estimate_ric(A, k, n_samples=200, seed=5).delta for k in (1, 2, 3)]
    for a, b in zip(dk, dk[1:]):
        assert b >= a


def test_degenerate_wide_submatrix():
    rng = np.random.default_rng(43)
    A = unit_columns(rng, 3, 10)
    est = estimate_ric(A, 2, n_samples=20)  # 2k = 4 > m = 3
    assert est.degenerate
    assert est.delta >= 1.0


def test_invalid_k():
    with pytest.raises(ValueError):
        estimate_ric(np.eye(4), 3)  # 2k = 6 > N = 4
    with pytest.raises(ValueError):
        exhaustive_ric(np.eye(4), 0)


def test_non_normalized_warns():
    with pytest.warns(UserWarning):
        estimate_ric(2.0 * np.eye(5), 1, n_samples=5)


def test_ric_bound_values():
    assert ric_bound(0.0, 1, 1.8, 1.0) == pytest.approx(4.0, abs=1e-12)
    assert ric_bound(0.0, 2, 1.8, 1.0) == pytest.approx(4 * 2 ** (1 / 1.8 - 0.5), abs=1e-12)
    # frozen from the closed form 4 sqrt(1.2) / (1 - (1+sqrt2) * 0.2)
    assert ric_bound(0.2, 2, 2.0, 1.0) == pytest.approx(8.472819712177566, rel=1e-12)
    assert ric_bound(math.sqrt(2) - 1, 1, 2.0, 1.0) is None
    assert ric_bound(0.9, 1, 2.0, 1.0) is None
    with pytest.raises(ValueError):
        ric_bound(0.1, 1, 3.0, 1.0)
    with pytest.raises(ValueError):
        ric_bound(-0.1, 1, 2.0, 1.0)


def test_ric_bound_increasing_in_delta():
    k, q, eps = 2, 1.8, 1.0
    grid = np.linspace(0.0, math.sqrt(2) - 1 - 1e-6, 40)
    vals = [ric_bound(d, k, q, eps) for d in grid]
    assert all(b > a for a, b in zip(vals, vals[1:]))
