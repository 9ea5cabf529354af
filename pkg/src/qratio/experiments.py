"""Desk-scale experiment harness.

Each experiment writes ``<name>_data.csv`` (one row per configuration point)
and ``<name>_manifest.json`` with the config, summary results, estimator
caveats and sha256 hashes of the data files.  Outputs are byte-identical for
identical (config, seed); wall-clock timing goes to ``<name>_timing.txt``,
which is intentionally kept out of the hashed CSV/JSON surface.
"""

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cmsv import CmsvRequest, estimate_cmsv
from .ensembles import EnsembleSpec, generate, nested_row_prefix
from .optim import SolverConfig
from .recovery import EXACT_SPARSE, required_sparsity_cap
from .ric import estimate_ric, ric_bound
from .verify import ccp_verify, verify_linf

__all__ = ["ExperimentConfig", "run_experiment", "EXPERIMENTS", "child_seed"]

CMSV_CAVEAT = (
    "cmsv values are multi-start upper bounds (UPPER_BOUND): "
    "derived error bounds may be optimistic"
)
RIC_CAVEAT = (
    "ric values are sampled lower bounds (LOWER_BOUND): "
    "derived error bounds may be optimistic"
)


def child_seed(base: int, *idx: int) -> int:
    """Stable derived seed for the (base, idx...) cell of an experiment."""
    return int(np.random.SeedSequence([int(base), *map(int, idx)]).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    seed: int = 0
    out_dir: str = "."
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            raise ValueError(
                f"unknown experiment {self.name!r}; choose from {sorted(EXPERIMENTS)}"
            )


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _median(values) -> float:
    return float(np.median(np.asarray(values, dtype=float)))


# ---------------------------------------------------------------------------
# individual experiments; each returns (header, rows, results, caveats)


def _cmsv_value(A, q, s, restarts, seed):
    est = estimate_cmsv(CmsvRequest(A, q, s, restarts=restarts, seed=seed))
    return est.value


def fig1_hist(seed, params):
    p = {
        "n_matrices": 100,
        "m": 40,
        "N": 60,
        "s": 4.0,
        "qs": (1.8, 2.0, 3.0),
        "restarts": 30,
        **params,
    }
    p.setdefault("scale", 1.0 / math.sqrt(p["m"]))  # recorded in the manifest
    header = ["q", "matrix_index", "cmsv"]
    rows = []
    for i in range(p["n_matrices"]):
        spec = EnsembleSpec(
            "gaussian", p["m"], p["N"], seed=child_seed(seed, i), scale=p["scale"]
        )
        A = generate(spec).entries
        for q in p["qs"]:
            rows.append((q, i, _cmsv_value(A, q, p["s"], p["restarts"], child_seed(seed, i, 1))))
    results = []
    for q in p["qs"]:
        vals = [r[2] for r in rows if r[0] == q]
        results.append(
            {"q": q, "mean": float(np.mean(vals)), "min": float(np.min(vals)), "count": len(vals)}
        )
    return p, header, rows, results, [CMSV_CAVEAT]


def _verification_rows(kind, seed, draws, N, m_list, ccp_qs, cfg):
    header = ["m", "draw", "method", "opt_value", "k_max", "certificate"]
    rows = []
    for m in m_list:
        for d in range(draws):
            spec = EnsembleSpec(kind, m, N, seed=child_seed(seed, m, d))
            A = generate(spec).entries
            linf = verify_linf(A, cfg)
            rows.append((m, d, "linf", linf.opt_value, linf.k_max, linf.certificate))
            for q in ccp_qs:
                res = ccp_verify(A, q, init=linf.witness, cfg=cfg)
                rows.append((m, d, f"ccp_{q:g}", res.opt_value, res.k_max, res.certificate))
    methods = ["linf"] + [f"ccp_{q:g}" for q in ccp_qs]
    results = [
        {
            "m": m,
            "method": meth,
            "median_k_max": _median(
                [r[4] for r in rows if r[0] == m and r[2] == meth]
            ),
        }
        for m in m_list
        for meth in methods
    ]
    return header, rows, results


def table1(seed, params):
    p = {"draws": 20, "N": 40, "m_list": (20, 24, 28, 32), "ccp_qs": (1.8, 2.0, 3.0, 20.0), **params}
    cfg = SolverConfig(seed=seed)
    header, rows, results = _verification_rows(
        "bernoulli", seed, p["draws"], p["N"], p["m_list"], p["ccp_qs"], cfg
    )
    return p, header, rows, results, ["ccp levels are heuristic upper estimates (HEURISTIC_UPPER)"]


def table2(seed, params):
    p = {"draws": 5, "N": 256, "m_list": (51, 128, 204), "ccp_qs": (2.0,), **params}
    if p.pop("full_grid", False):
        p["m_list"] = (25, 51, 76, 102, 128, 153, 179, 204, 230)
        p["ccp_qs"] = (1.8, 2.0, 3.0, 20.0)
    cfg = SolverConfig(seed=seed, tol_dual=1e-6)
    header, rows, results = _verification_rows(
        "gaussian", seed, p["draws"], p["N"], p["m_list"], p["ccp_qs"], cfg
    )
    return p, header, rows, results, ["ccp levels are heuristic upper estimates (HEURISTIC_UPPER)"]


def _cmsv_grid(seed, params, m_list, qs, s_list):
    """Shared machinery of the cmsv-vs-{s,m,q} figures: one Bernoulli draw,
    row prefixes, unit columns."""
    p = params
    spec = EnsembleSpec(
        "bernoulli", max(m_list), p["N"], seed=child_seed(seed, 0), normalize_columns=True
    )
    mats = nested_row_prefix(spec, sorted(m_list))
    header = ["m", "q", "s", "cmsv"]
    rows = []
    for M in mats:
        m = M.shape[0]
        for q in qs:
            for s in s_list:
                rows.append(
                    (m, q, s, _cmsv_value(M.entries, q, s, p["restarts"], child_seed(seed, m, 1)))
                )
    return header, rows


def fig2_cmsv_vs_s(seed, params):
    p = {
        "N": 60,
        "m_list": (20, 30, 40),
        "qs": (1.8, 2.0, 3.0),
        "s_list": (2.0, 4.0, 6.0, 8.0, 10.0),
        "restarts": 30,
        **params,
    }
    header, rows = _cmsv_grid(seed, p, p["m_list"], p["qs"], p["s_list"])
    results = [{"cells": len(rows)}]
    return p, header, rows, results, [CMSV_CAVEAT]


def fig3_cmsv_vs_m(seed, params):
    p = {
        "N": 60,
        "m_list": (20, 24, 28, 32, 36, 40),
        "qs": (1.8, 2.0, 3.0),
        "s_list": (4.0, 6.0, 8.0),
        "restarts": 30,
        **params,
    }
    header, rows = _cmsv_grid(seed, p, p["m_list"], p["qs"], p["s_list"])
    results = [{"cells": len(rows)}]
    return p, header, rows, results, [CMSV_CAVEAT]


def fig4_cmsv_vs_q(seed, params):
    p = {
        "N": 60,
        "m_list": (20, 30, 40),
        "qs": (1.2, 1.5, 1.8, 2.0, 2.5, 3.0, 4.0, 6.0, 10.0),
        "s_list": (2.0, 4.0, 8.0),
        "restarts": 30,
        **params,
    }
    header, rows = _cmsv_grid(seed, p, p["m_list"], p["qs"], p["s_list"])
    results = [{"cells": len(rows)}]
    return p, header, rows, results, [CMSV_CAVEAT]


def fig5_bounds(seed, params):
    p = {
        "N": 64,
        "k_list": (1, 2, 4),
        "q": 1.8,
        "eps": 1.0,
        "ric_samples": 1000,
        "restarts": 30,
        "m_step": 8,
        **params,
    }
    q, eps, N = p["q"], p["eps"], p["N"]
    header = ["k", "m", "s", "rho", "cmsv_bound", "delta", "ric_bound"]
    rows = []
    for k in p["k_list"]:
        m_grid = sorted(set(list(range(10 * k, N + 1, p["m_step"])) + [N]))
        s = required_sparsity_cap("l2_ball", EXACT_SPARSE, k, q)
        for m in m_grid:
            spec = EnsembleSpec(
                "hadamard_sub",
                m,
                N,
                seed=child_seed(seed, k, m),
                row_permutation_seed=child_seed(seed, k, m, 1),
            )
            A = generate(spec).entries
            rho = _cmsv_value(A, q, min(s, N), p["restarts"], child_seed(seed, k, m, 2))
            cmsv_b = 2.0 * eps / rho if rho > 1e-12 else float("nan")
            delta = estimate_ric(A, k, n_samples=p["ric_samples"], seed=child_seed(seed, k, m, 3)).delta
            rb = ric_bound(delta, k, q, eps)
            rows.append((k, m, s, rho, cmsv_b, delta, float("nan") if rb is None else rb))
    both = [r for r in rows if not (math.isnan(r[4]) or math.isnan(r[6]))]
    results = [
        {
            "cells_with_both_bounds": len(both),
            "cmsv_dominates": sum(1 for r in both if r[4] <= r[6]),
        }
    ]
    return p, header, rows, results, [CMSV_CAVEAT, RIC_CAVEAT]


EXPERIMENTS = {
    "fig1_hist": fig1_hist,
    "table1": table1,
    "table2": table2,
    "fig2_cmsv_vs_s": fig2_cmsv_vs_s,
    "fig3_cmsv_vs_m": fig3_cmsv_vs_m,
    "fig4_cmsv_vs_q": fig4_cmsv_vs_q,
    "fig5_bounds": fig5_bounds,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run one experiment; returns the manifest (also written to disk)."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    t0 = time.perf_counter()
    params, header, rows, results, caveats = EXPERIMENTS[cfg.name](cfg.seed, dict(cfg.params))
    elapsed = time.perf_counter() - t0

    data_path = os.path.join(cfg.out_dir, f"{cfg.name}_data.csv")
    _write_csv(data_path, header, rows)
    manifest = {
        "config": {
            "name": cfg.name,
            "seed": cfg.seed,
            "params": {k: (list(v) if isinstance(v, tuple) else v) for k, v in params.items()},
        },
        "results": results,
        "caveats": caveats,
        "outputs": {os.path.basename(data_path): _sha256(data_path)},
        "version": __version__,
    }
    manifest_path = os.path.join(cfg.out_dir, f"{cfg.name}_manifest.json")
    with open(manifest_path, "w", encoding="ascii") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    # timing lives outside the reproducible CSV/JSON surface
    with open(os.path.join(cfg.out_dir, f"{cfg.name}_timing.txt"), "w") as fh:
        fh.write(f"wall_clock_seconds: {elapsed:.3f}\n")
    return manifest
