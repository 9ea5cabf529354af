"""Command-line interface.

Subcommands: gen-matrix, sparsity, cmsv, verify, recover, ric, bounds,
experiment.  Every command takes --seed (default 0) and the analysis commands
take --json for machine output.  Exit codes: 0 success, 1 computation error,
2 usage error.  QRATIO_OUT sets the default output directory for experiments
and QRATIO_BACKEND selects the kernel backend (numba or numpy).
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .cmsv import CmsvRequest, estimate_cmsv
from .ensembles import EnsembleSpec, generate
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment
from .io import read_matrix, read_vector, write_matrix, write_vector
from .optim import SolverConfig
from .recovery import (
    COMPRESSIBLE,
    EXACT_SPARSE,
    NoiseModel,
    bound_exact_sparse,
    bound_compressible,
    required_sparsity_cap,
    solve_bp,
    solve_ds,
    solve_lasso,
)
from .ric import estimate_ric, ric_bound
from .sparsity import q_ratio_sparsity
from .verify import ccp_verify, verify_linf


def _parse_q(text: str) -> float:
    return math.inf if text.lower() in ("inf", "infinity") else float(text)


def _emit(payload: dict, as_json: bool, lines=None):
    if as_json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in lines if lines is not None else (f"{k}: {v}" for k, v in payload.items()):
            print(line)


def _cmd_gen_matrix(args) -> int:
    spec = EnsembleSpec(
        kind=args.kind,
        m=args.m,
        N=args.N,
        seed=args.seed,
        scale=args.scale,
        normalize_columns=args.normalize_columns,
        row_permutation_seed=args.row_perm_seed,
    )
    M = generate(spec)
    write_matrix(args.out, M.entries)
    print(f"wrote {args.m}x{args.N} {args.kind} matrix to {args.out}")
    return 0


def _cmd_sparsity(args) -> int:
    v = read_vector(args.input)
    s = q_ratio_sparsity(v, args.q)
    _emit({"q": args.q, "sparsity": s}, args.json, [f"{s:.12g}"])
    return 0


def _cmd_cmsv(args) -> int:
    A = read_matrix(args.matrix)
    est = estimate_cmsv(
        CmsvRequest(A, args.q, args.s, restarts=args.restarts, seed=args.seed)
    )
    payload = {
        "q": args.q,
        "s": args.s,
        "cmsv": est.value,
        "direction": est.direction,
        "restarts": args.restarts,
        "trial_best_counts": int(np.sum(est.trial_values <= est.value * (1 + 1e-9))),
    }
    _emit(payload, args.json, [f"{est.value:.12g}"])
    return 0


def _cmd_verify(args) -> int:
    A = read_matrix(args.matrix)
    cfg = SolverConfig(seed=args.seed)
    if args.method == "linf":
        res = verify_linf(A, cfg)
    else:
        res = ccp_verify(A, args.q, cfg=cfg)
    payload = {
        "method": args.method,
        "q": None if math.isinf(res.q) else res.q,
        "opt_value": res.opt_value,
        "k_max": res.k_max,
        "certificate": res.certificate,
    }
    _emit(
        payload,
        args.json,
        [f"k_max: {res.k_max}", f"opt_value: {res.opt_value!r}", f"certificate: {res.certificate}"],
    )
    return 0


def _cmd_recover(args) -> int:
    A = read_matrix(args.matrix)
    y = read_vector(args.y)
    cfg = SolverConfig(seed=args.seed)
    if args.solver == "bp":
        res = solve_bp(A, y, args.level, cfg)
    elif args.solver == "ds":
        res = solve_ds(A, y, args.level, cfg)
    else:
        res = solve_lasso(A, y, args.level, cfg)
    if args.out:
        write_vector(args.out, res.x_hat)
    payload = {
        "solver": args.solver,
        "level": args.level,
        "converged": res.converged,
        "iterations": res.iterations,
        "l1_norm": float(np.abs(res.x_hat).sum()),
        "residual_l2": float(np.linalg.norm(y - A @ res.x_hat)),
    }
    _emit(payload, args.json)
    return 0 if res.converged else 1


def _cmd_ric(args) -> int:
    A = read_matrix(args.matrix)
    est = estimate_ric(A, args.k, n_samples=args.samples, seed=args.seed)
    payload = {
        "k": args.k,
        "delta": est.delta,
        "n_samples": est.n_samples,
        "direction": est.direction,
        "degenerate": est.degenerate,
    }
    _emit(payload, args.json)
    return 0


def _cmd_bounds(args) -> int:
    A = read_matrix(args.matrix)
    kind = {"bp": "l2_ball", "ds": "correlated_inf", "lasso": "lasso_pen"}[args.solver]
    noise = NoiseModel(kind, args.level, args.kappa if args.solver == "lasso" else None)
    regime = EXACT_SPARSE if args.regime == "sparse" else COMPRESSIBLE
    s = required_sparsity_cap(kind, regime, args.k, args.q, noise.kappa)
    if s > A.shape[1]:
        print(
            "error: required sparsity cap exceeds the signal length; "
            "the bound does not apply at this (k, q)",
            file=sys.stderr,
        )
        return 1
    rho = estimate_cmsv(CmsvRequest(A, args.q, s, restarts=args.restarts, seed=args.seed))
    if regime == EXACT_SPARSE:
        rep = bound_exact_sparse(rho, args.k, args.q, noise)
    else:
        rep = bound_compressible(rho, args.k, args.q, noise, args.sigma_k)
    ric_b = None
    if args.with_ric and 1.0 <= args.q <= 2.0 and kind == "l2_ball":
        delta = estimate_ric(A, args.k, seed=args.seed).delta
        ric_b = ric_bound(delta, args.k, args.q, args.level)
    payload = {
        "solver": args.solver,
        "regime": args.regime,
        "k": args.k,
        "q": args.q,
        "s": s,
        "rho": rho.value,
        "bound_lq": rep.bound_lq,
        "bound_l1": rep.bound_l1,
        "caveats": rep.caveat_flags,
    }
    if rep.bound_lq_sharp is not None:
        payload["bound_lq_sharp"] = rep.bound_lq_sharp
        payload["bound_l1_sharp"] = rep.bound_l1_sharp
    if args.with_ric:
        payload["ric_bound"] = ric_b
    _emit(payload, args.json)
    return 0


def _cmd_experiment(args) -> int:
    params = {}
    for kv in args.set or []:
        key, _, value = kv.partition("=")
        if not _:
            raise SystemExit(f"--set expects key=value, got {kv!r}")
        params[key] = json.loads(value)
    if args.threads is not None:
        try:
            import numba

            numba.set_num_threads(args.threads)
        except ImportError:
            pass
    cfg = ExperimentConfig(name=args.name, seed=args.seed, out_dir=args.out_dir, params=params)
    manifest = run_experiment(cfg)
    print(json.dumps({"outputs": manifest["outputs"]}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qratio",
        description="q-ratio sparsity, CMSV, recovery solvers and error bounds",
    )
    ap.add_argument("--version", action="version", version=f"qratio {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, json_flag=True):
        p.add_argument("--seed", type=int, default=0)
        if json_flag:
            p.add_argument("--json", action="store_true")

    p = sub.add_parser("gen-matrix", help="generate an ensemble matrix as CSV")
    p.add_argument("--kind", required=True, choices=["gaussian", "bernoulli", "hadamard_sub"])
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--scale", type=float, default=None)
    p.add_argument("--normalize-columns", action="store_true")
    p.add_argument("--row-perm-seed", type=int, default=None)
    p.add_argument("--out", required=True)
    add_common(p, json_flag=False)
    p.set_defaults(func=_cmd_gen_matrix)

    p = sub.add_parser("sparsity", help="q-ratio sparsity of a vector")
    p.add_argument("--input", required=True)
    p.add_argument("--q", type=_parse_q, required=True)
    add_common(p)
    p.set_defaults(func=_cmd_sparsity)

    p = sub.add_parser("cmsv", help="estimate the q-ratio CMSV of a matrix")
    p.add_argument("--matrix", required=True)
    p.add_argument("--q", type=_parse_q, required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--restarts", type=int, default=30)
    add_common(p)
    p.set_defaults(func=_cmd_cmsv)

    p = sub.add_parser("verify", help="maximal exactly-recoverable sparsity")
    p.add_argument("--matrix", required=True)
    p.add_argument("--method", choices=["linf", "ccp"], default="linf")
    p.add_argument("--q", type=_parse_q, default=2.0, help="order for --method ccp")
    add_common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("recover", help="solve BP / DS / lasso")
    p.add_argument("--matrix", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--solver", choices=["bp", "ds", "lasso"], required=True)
    p.add_argument("--level", type=float, required=True, help="eps or lambda_N*sigma")
    p.add_argument("--out", default=None, help="write the recovered vector here")
    add_common(p)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser("ric", help="Monte Carlo restricted isometry constant")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)
    add_common(p)
    p.set_defaults(func=_cmd_ric)

    p = sub.add_parser("bounds", help="CMSV-based recovery error bounds")
    p.add_argument("--matrix", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=_parse_q, default=2.0)
    p.add_argument("--solver", choices=["bp", "ds", "lasso"], default="bp")
    p.add_argument("--level", type=float, required=True)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--regime", choices=["sparse", "compressible"], default="sparse")
    p.add_argument("--sigma-k", type=float, default=0.0)
    p.add_argument("--restarts", type=int, default=30)
    p.add_argument("--with-ric", action="store_true", help="also report the RIC bound")
    add_common(p)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("experiment", help="run a named desk-scale experiment")
    p.add_argument("--name", required=True, choices=sorted(EXPERIMENTS))
    p.add_argument("--out-dir", default=os.environ.get("QRATIO_OUT", "."))
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--set", action="append", metavar="KEY=JSON", help="override a parameter")
    add_common(p, json_flag=False)
    p.set_defaults(func=_cmd_experiment)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
