"""Tile-level factorization kernels.

The LDL^T kernel has a compiled (Cython) core and a pure-NumPy fallback with
identical pivoting; the compiled one is used when importable.  Set
``OOCDET_PURE_PYTHON=1`` to force the fallback (used by the benchmark).
LU and Cholesky route to LAPACK via SciPy either way.
"""

import os

_force_pure = os.environ.get("OOCDET_PURE_PYTHON", "") not in ("", "0")

if _force_pure:
    from . import _ldl_numpy as _ldl_impl
    HAVE_COMPILED_LDL = False
else:
    try:
        from . import _ldl as _ldl_impl
        HAVE_COMPILED_LDL = True
    except ImportError:
        from . import _ldl_numpy as _ldl_impl
        HAVE_COMPILED_LDL = False

from .dense import (  # noqa: E402
    PIVOT_TOL_SCALE,
    cholesky_inplace,
    ldl_inplace,
    lu_inplace,
    perm_from_swaps,
    schur_update,
    solve_lower_inplace,
    solve_upper_right_inplace,
)

__all__ = [
    "HAVE_COMPILED_LDL",
    "PIVOT_TOL_SCALE",
    "cholesky_inplace",
    "ldl_inplace",
    "lu_inplace",
    "perm_from_swaps",
    "schur_update",
    "solve_lower_inplace",
    "solve_upper_right_inplace",
]
