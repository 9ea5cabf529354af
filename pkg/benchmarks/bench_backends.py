#!/usr/bin/env python3
"""Compare the numba kernels against the pure-numpy fallback.

Runs each hot kernel on a representative workload with both backends and
prints a timing table.  Usage:

    python benchmarks/bench_backends.py [--repeat 5]

The backend used by the package at runtime is chosen by QRATIO_BACKEND; this
script imports both implementations directly, so it is independent of that
setting (numba must be importable).
"""

import argparse
import time

import numpy as np

from qratio.kernels import _numba, _numpy


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(rng):
    N, m, K = 256, 128, 64
    A = np.ascontiguousarray(rng.standard_normal((m, N)) / np.sqrt(m))
    AtA = np.ascontiguousarray(A.T @ A)
    P = np.ascontiguousarray(A.T @ np.linalg.inv(A @ A.T))
    L = 2 * np.linalg.norm(A, 2) ** 2
    b = np.zeros(m)
    C = np.ascontiguousarray(np.eye(N)[:, :K])
    v = rng.standard_normal(4096)
    V = np.ascontiguousarray(rng.standard_normal((N, K)))
    Z0 = np.ascontiguousarray(rng.standard_normal((30, N)))
    ev, Um = np.linalg.eigh(A @ A.T)
    Um = np.ascontiguousarray(Um)
    At = np.ascontiguousarray(A.T)
    y = A @ rng.standard_normal(N)
    Aty = A.T @ y
    yty = float(y @ y)

    def lp_state():
        return np.zeros((N, K)), np.zeros((N, K))

    return [
        ("l1_project (n=4096)", lambda K_: K_.l1_project(v, 1.0)),
        ("l1_project_cols (256x64)", lambda K_: K_.l1_project_cols(V, 1.0)),
        ("soft_threshold (n=4096)", lambda K_: K_.soft_threshold(v, 0.1)),
        ("retract_to_sphere (n=4096)", lambda K_: K_.retract_to_sphere(v, 2.0, 4.0)),
        (
            "dr_lp_chunk 500 iters (128x256, 64 cols)",
            lambda K_: K_.dr_lp_chunk(A, P, b, C, 1.0, 0.15, 1.7, *lp_state(), 500),
        ),
        (
            "cmsv_pg_trials 30x500 iters (256-dim)",
            lambda K_: K_.cmsv_pg_trials(AtA, Z0, 2.0, 2.0, L, 500, 1e-9, 0.0),
        ),
        (
            "bp_dr_chunk 500 iters (128x256)",
            lambda K_: K_.bp_dr_chunk(
                A, At, Um, ev, y, 0.1, 0.0, 0.1, 1.7, np.zeros(N), np.zeros(N), 500
            ),
        ),
        (
            "fista_lasso 2000 iters (128x256)",
            lambda K_: K_.fista_lasso(AtA, Aty, yty, 0.05, L / 2, np.zeros(N), 2000, 0.0),
        ),
        (
            "pdhg_ds_chunk 1000 iters (256-dim)",
            lambda K_: K_.pdhg_ds_chunk(
                AtA, Aty, 0.1, 1.0 / (L / 2), 1.0 / (L / 2),
                np.zeros(N), np.zeros(N), np.zeros(N), 1000
            ),
        ),
    ]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    cases = workloads(rng)
    # trigger jit compilation outside the timed region
    for _, fn in cases:
        fn(_numba)

    print(f"{'kernel':<44} {'numpy':>10} {'numba':>10} {'speedup':>9}")
    for name, fn in cases:
        t_np = timeit(lambda: fn(_numpy), args.repeat)
        t_nb = timeit(lambda: fn(_numba), args.repeat)
        print(f"{name:<44} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms {t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
