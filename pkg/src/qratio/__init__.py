"""q-ratio sparsity, constrained minimal singular values, and sparse-recovery
error bounds for measurement matrices."""

__version__ = "0.1.0"

from .cmsv import (
    CmsvEstimate,
    CmsvRequest,
    brute_force_cmsv,
    check_order_chain,
    estimate_cmsv,
)
from .ensembles import EnsembleSpec, generate, nested_row_prefix
from .optim import (
    LpProblem,
    SolverConfig,
    extreme_singular_values,
    kernel_basis,
    project_l1_ball,
    project_nullspace,
    soft_threshold,
    solve_lp,
)
from .recovery import (
    BoundReport,
    NoiseModel,
    RecoveryResult,
    bound_exact_sparse,
    bound_compressible,
    solve_bp,
    solve_ds,
    solve_lasso,
)
from .ric import RicEstimate, estimate_ric, exhaustive_ric, ric_bound
from .sparsity import (
    MeasurementMatrix,
    best_k_term_error,
    lq_norm,
    q_ratio_sparsity,
    weight_distribution,
)
from .verify import VerificationResult, ccp_verify, max_recoverable_sparsity, verify_linf

__all__ = [
    "__version__",
    "MeasurementMatrix",
    "lq_norm",
    "q_ratio_sparsity",
    "weight_distribution",
    "best_k_term_error",
    "LpProblem",
    "SolverConfig",
    "project_l1_ball",
    "project_nullspace",
    "soft_threshold",
    "solve_lp",
    "kernel_basis",
    "extreme_singular_values",
    "CmsvRequest",
    "CmsvEstimate",
    "estimate_cmsv",
    "brute_force_cmsv",
    "check_order_chain",
    "VerificationResult",
    "verify_linf",
    "ccp_verify",
    "max_recoverable_sparsity",
    "NoiseModel",
    "RecoveryResult",
    "BoundReport",
    "solve_bp",
    "solve_ds",
    "solve_lasso",
    "bound_exact_sparse",
    "bound_compressible",
    "RicEstimate",
    "estimate_ric",
    "exhaustive_ric",
    "ric_bound",
    "EnsembleSpec",
    "generate",
    "nested_row_prefix",
]
