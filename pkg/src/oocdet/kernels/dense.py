"""In-place dense operations on square/rectangular tiles.

All functions write their result back into the tile arguments.  Pivot vectors
use the LAPACK swap convention: ``swaps[r]`` is the index exchanged with
``r`` at step r, applied in increasing r.  ``perm_from_swaps`` converts that
to a permutation vector ``perm`` with ``(P^T A P)[i, j] == A[perm[i], perm[j]]``
(and for LU, ``(P^T B)[i] == B[perm[i]]``).
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, solve_triangular
from scipy.linalg import cholesky as _cholesky
from numpy.linalg import LinAlgError

from ..errors import IndefiniteBlockError, NotSpdError, NumericalError

# |pivot| < PIVOT_TOL_SCALE * eps * max|A| fails the LDL factorization
PIVOT_TOL_SCALE = 64.0


def perm_from_swaps(swaps: np.ndarray) -> np.ndarray:
    perm = np.arange(len(swaps), dtype=np.int64)
    for r, t in enumerate(swaps):
        if t != r:
            perm[r], perm[t] = perm[t], perm[r]
    return perm


def swap_parity(swaps: np.ndarray) -> int:
    odd = int(np.count_nonzero(swaps != np.arange(len(swaps)))) % 2
    return -1 if odd else 1


def lu_inplace(a: np.ndarray):
    """LU with partial pivoting, factors written back into ``a``.

    Returns ``(swaps, logabsdet, sign)``.  A singular tile is not an error:
    it yields ``(-inf, 0)``.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(a, check_finite=False)
    if lu is not a:
        a[:] = lu
    diag = np.diagonal(a)
    if np.any(diag == 0.0):
        return piv, -np.inf, 0
    logabsdet = float(np.sum(np.log(np.abs(diag))))
    sign = swap_parity(piv) * int(np.prod(np.sign(diag)))
    return piv, logabsdet, sign


def ldl_inplace(a: np.ndarray):
    """LDL^T with 1x1 diagonal pivoting: P^T A P = L D L^T.

    ``a`` must be symmetric; the strictly lower triangle is replaced by unit
    L and ``(swaps, d)`` is returned.  Raises IndefiniteBlockError when the
    best available pivot is below tolerance (a hard indefinite tile that 1x1
    pivoting cannot handle, or a singular one).
    """
    from . import _ldl_impl

    n = a.shape[0]
    if a.shape[1] != n:
        raise ValueError(f"tile must be square, got {a.shape}")
    amax = float(np.max(np.abs(a))) if n else 0.0
    if n and amax == 0.0:
        raise IndefiniteBlockError("LDL on an all-zero tile")
    tol = PIVOT_TOL_SCALE * float(np.finfo(a.dtype).eps) * amax
    swaps = np.empty(n, dtype=np.int64)
    d = np.empty(n, dtype=a.dtype)
    work = np.empty(n, dtype=a.dtype)
    fail = _ldl_impl.ldl_factor(a, swaps, d, work, tol)
    if fail >= 0:
        raise IndefiniteBlockError(
            f"LDL pivot {fail}: |{a[fail, fail]:.3e}| below tolerance {tol:.3e}")
    return swaps, d


def cholesky_inplace(a: np.ndarray) -> np.ndarray:
    """Cholesky A = L L^T, L written to the lower triangle; returns diag(L)."""
    try:
        c = _cholesky(a, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise NotSpdError(f"tile is not positive-definite: {exc}") from exc
    a[:] = c
    return np.diagonal(a).copy()


def solve_lower_inplace(l: np.ndarray, b: np.ndarray, unit_diag: bool = False):
    """B <- L^{-1} B for lower-triangular L."""
    if not unit_diag and np.any(np.diagonal(l) == 0.0):
        raise NumericalError("singular lower-triangular solve (zero diagonal)")
    b[:] = solve_triangular(l, b, lower=True, unit_diagonal=unit_diag,
                            check_finite=False)


def solve_upper_right_inplace(u: np.ndarray, c: np.ndarray):
    """C <- U^{-T} C, i.e. the transposed form of a right solve against U."""
    if np.any(np.diagonal(u) == 0.0):
        raise NumericalError("singular upper-triangular solve (zero diagonal)")
    c[:] = solve_triangular(u, c, trans="T", lower=False, check_finite=False)


def schur_update(s: np.ndarray, c: np.ndarray, b: np.ndarray, form: str = "ct_b"):
    """S <- S - C^T B (``ct_b``) or S <- S - C B (``c_b``)."""
    if form == "ct_b":
        s -= c.T @ b
    elif form == "c_b":
        s -= c @ b
    else:
        raise ValueError(f"unknown form {form!r}")
