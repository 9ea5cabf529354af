"""Hot-loop kernels with selectable backend.

The environment variable ``QRATIO_BACKEND`` picks the implementation:
``numba`` (default when numba imports cleanly) or ``numpy`` (pure-numpy
fallback, same math).  ``benchmarks/bench_backends.py`` compares the two.
"""

import os

_requested = os.environ.get("QRATIO_BACKEND", "").strip().lower()

if _requested in ("", "numba"):
    try:
        from . import _numba as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import _numpy as _impl

        BACKEND = "numpy"
elif _requested == "numpy":
    from . import _numpy as _impl

    BACKEND = "numpy"
else:
    raise ImportError(
        f"QRATIO_BACKEND={_requested!r} not recognized (use 'numba' or 'numpy')"
    )

STAT_STATIONARY = _impl.STAT_STATIONARY
STAT_MAXITER = _impl.STAT_MAXITER
STAT_NO_DESCENT = _impl.STAT_NO_DESCENT

l1_project = _impl.l1_project
l1_project_cols = _impl.l1_project_cols
soft_threshold = _impl.soft_threshold
lq_norm_fast = _impl.lq_norm_fast
retract_to_sphere = _impl.retract_to_sphere
cmsv_pg_trials = _impl.cmsv_pg_trials
dr_lp_chunk = _impl.dr_lp_chunk
bp_dr_chunk = _impl.bp_dr_chunk
fista_lasso = _impl.fista_lasso
pdhg_ds_chunk = _impl.pdhg_ds_chunk

__all__ = [
    "BACKEND",
    "STAT_STATIONARY",
    "STAT_MAXITER",
    "STAT_NO_DESCENT",
    "l1_project",
    "l1_project_cols",
    "soft_threshold",
    "lq_norm_fast",
    "retract_to_sphere",
    "cmsv_pg_trials",
    "dr_lp_chunk",
    "bp_dr_chunk",
    "fista_lasso",
    "pdhg_ds_chunk",
]
