"""Memory-budgeted log-determinants via blocked factorizations on disk.

Three drivers share one pattern: the matrix lives on disk as an n_b-by-n_b
grid of tiles, at most four of which (A, B, C, S) are resident.  Stage k
factors the current diagonal tile A, eliminates it from every trailing tile
through triangular solves and Schur updates, and stores updated tiles on a
scratchpad; the final Schur tile of the stage stays resident as the next A.

    memdet_lu        generic matrices, partial pivoting, log|det| and sign
    memdet_ldl       symmetric matrices, 1x1 diagonal pivoting; also returns
                     the permutation and the log-determinant prefix sequence
    memdet_cholesky  symmetric positive-definite; prefix sequence, no pivots

Tile visit order matters only through disk traffic: consecutive visits are
arranged to share a resident operand (a Hamiltonian walk over tile pairs), so
blocks-read/blocks-written match the closed forms in :mod:`oocdet.cost`
exactly.  ``schedule`` exposes that order for inspection.

The block count is chosen from a byte budget c via r = m * sqrt(beta / c):
r <= 1 means the whole matrix fits (n_b = 1), r <= 2/sqrt(3) means three
tiles fit (n_b = 2), otherwise n_b = ceil(2 r).  Comparisons are done in
exact integer arithmetic so budget boundaries are honored.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

from .cost import scratch_slots
from .errors import NotSpdError
from .kernels import (
    cholesky_inplace,
    ldl_inplace,
    lu_inplace,
    perm_from_swaps,
    schur_update,
    solve_lower_inplace,
    solve_upper_right_inplace,
)
from .layout import BlockLayout
from .prefixio import PrefixWriter
from .storage import BlockStore, MatrixFile


@dataclass(frozen=True)
class Budget:
    """Byte budget for resident tiles; needs room for a 1x1 three-tile grid."""

    max_mem: int
    dtype_bytes: int = 8

    def __post_init__(self):
        if self.max_mem < 3 * self.dtype_bytes:
            raise ValueError(
                f"budget {self.max_mem} B below minimum {3 * self.dtype_bytes} B")


def select_blocking(m: int, budget: Budget) -> tuple[int, BlockLayout]:
    """Pick n_b for the given budget and build the matching layout."""
    if m < 1:
        raise ValueError(f"matrix dimension must be >= 1, got {m}")
    c, beta = budget.max_mem, budget.dtype_bytes
    msq = m * m * beta
    if msq <= c:                # r <= 1
        n_b = 1
    elif 3 * msq <= 4 * c:      # r <= 2/sqrt(3)
        n_b = 2
    else:                       # ceil(2 r): least q with q^2 c >= 4 m^2 beta
        target = 4 * msq
        q = math.isqrt(target // c)
        while q * q * c < target:
            q += 1
        n_b = q
    layout = BlockLayout.from_grid(m, n_b, beta)
    return layout.n_b, layout


class _Visit(NamedTuple):
    i: int
    j: int
    new_row: bool = False    # generic: load + solve a fresh C for this row
    col_start: bool = False  # symmetric: column prologue (B* handling)
    load_b: bool = False
    solve_b: bool = False
    write_b: bool = False
    load_c: bool = False
    solve_c: bool = False
    write_c: bool = False
    next_diag: bool = False  # update lands in A, seeding the next stage


def _generic_stage(n_b: int, k: int) -> Iterator[_Visit]:
    """Stage-k visits for the generic case, 0-based, k < n_b - 1.

    Rows are processed bottom-up; within a row the column direction
    alternates, so one of B/C is always reused between consecutive visits.
    The bottom row performs the lower solves on row k and stores them for
    the rows above; the walk ends on tile (k+1, k+1).
    """
    t = n_b - 1 - k
    for i in range(n_b - 1, k, -1):
        ascending = (i - k) % 2 == 0
        if ascending:
            js, first, last = range(k + 1, n_b), k + 1, n_b - 1
        else:
            js, first, last = range(n_b - 1, k, -1), n_b - 1, k + 1
        for j in js:
            on_bottom = i == n_b - 1
            yield _Visit(
                i=i, j=j,
                new_row=(j == first),
                load_b=on_bottom or j != first,
                solve_b=on_bottom,
                write_b=on_bottom and (t > 2 or j != last),
                next_diag=(i == k + 1 and j == k + 1),
            )


def _symmetric_stage(n_b: int, k: int) -> Iterator[_Visit]:
    """Stage-k visits for the symmetric/SPD case, 0-based, k < n_b - 1.

    Columns run right to left; each column starts at its diagonal tile and
    then sweeps rows k+1..j-1.  Only the rightmost column loads and solves
    row-k tiles; later columns reuse them from the scratchpad or from the
    buffer left over by the previous column.  The walk ends on (k+1, k+1).
    """
    for j in range(n_b - 1, k, -1):
        rows = [j] + list(range(k + 1, j))
        for pos, i in enumerate(rows):
            off_diag = i != j
            in_last_col = j == n_b - 1
            yield _Visit(
                i=i, j=j,
                col_start=(pos == 0),
                load_b=(pos == 0 and in_last_col),
                load_c=off_diag,
                solve_c=off_diag and in_last_col,
                write_c=off_diag and in_last_col and n_b > 2 and i < j - 1,
                next_diag=(i == k + 1 and j == k + 1),
            )


@dataclass(frozen=True)
class ScheduleEntry:
    i: int
    j: int
    loads: tuple[str, ...]
    target: str  # "resident" for the next-stage diagonal, else "store"


def schedule(n_b: int, case: str, k: int) -> list[ScheduleEntry]:
    """Ordered tile visits for stage k (1-based), with fresh-load annotations.

    Every inner tile of the stage appears exactly once, consecutive entries
    share a loaded operand, and the final entry is tile (k+1, k+1).
    """
    if case not in ("generic", "symmetric"):
        raise ValueError(f"case must be 'generic' or 'symmetric', got {case!r}")
    if not 1 <= k < n_b:
        raise ValueError(f"stage k must satisfy 1 <= k < n_b, got k={k}, n_b={n_b}")
    gen = _generic_stage if case == "generic" else _symmetric_stage
    entries = []
    for v in gen(n_b, k - 1):
        loads = []
        if v.load_b:
            loads.append("B")
        if (case == "generic" and v.new_row) or v.load_c:
            loads.append("C")
        entries.append(ScheduleEntry(
            i=v.i + 1, j=v.j + 1, loads=tuple(loads),
            target="resident" if v.next_diag else "store"))
    return entries


@dataclass(frozen=True)
class RunInfo:
    m: int
    case: str
    n_b: int
    b: int
    blocks_read: int
    blocks_written: int
    scratch_slots: int
    wall_seconds: float

    def to_json_dict(self) -> dict:
        return {
            "m": self.m, "case": self.case, "n_b": self.n_b, "b": self.b,
            "blocks_read": self.blocks_read,
            "blocks_written": self.blocks_written,
            "scratch_slots": self.scratch_slots,
            "wall_seconds": self.wall_seconds,
        }


@dataclass(frozen=True)
class GenericResult:
    logabsdet: float
    sign: int
    info: RunInfo


@dataclass(frozen=True)
class SymmetricResult:
    """Permutation, prefix log-determinants, and prefix signs.

    ``prefix[q-1]`` is log|det| of the q-by-q leading principal submatrix of
    the permuted matrix M[perm[:q], perm[:q]] (0-based positions to original
    indices); ``prefix_signs[q-1]`` is the matching determinant sign.
    """

    perm: np.ndarray
    prefix: np.ndarray
    prefix_signs: np.ndarray
    info: RunInfo

    @property
    def logabsdet(self) -> float:
        return float(self.prefix[-1])

    @property
    def sign(self) -> int:
        return int(self.prefix_signs[-1])


@dataclass(frozen=True)
class SpdResult:
    """Prefix log-determinants of the (unpermuted) leading submatrices."""

    prefix: np.ndarray
    info: RunInfo

    @property
    def logabsdet(self) -> float:
        return float(self.prefix[-1])

    sign = 1


def _open_input(matrix) -> MatrixFile:
    return matrix if isinstance(matrix, MatrixFile) else MatrixFile.open(matrix)


def _pick_layout(mf: MatrixFile, max_mem, num_blocks) -> BlockLayout:
    if num_blocks is not None:
        return BlockLayout.from_grid(mf.m, num_blocks, mf.dtype.itemsize)
    if max_mem is None:
        raise ValueError("either max_mem or num_blocks is required")
    _, layout = select_blocking(mf.m, Budget(max_mem, mf.dtype.itemsize))
    return layout


def _run_info(case, lay, store, t0) -> RunInfo:
    return RunInfo(
        m=lay.m, case=case, n_b=lay.n_b, b=lay.b,
        blocks_read=store.counters.blocks_read,
        blocks_written=store.counters.blocks_written,
        scratch_slots=store.peak_scratch_slots,
        wall_seconds=time.perf_counter() - t0,
    )


def memdet_lu(matrix, *, max_mem=None, num_blocks=None, scratch_dir=None) -> GenericResult:
    """Log-absolute-determinant and sign of a generic matrix.

    A singular stage short-circuits and returns (-inf, 0) rather than
    raising (transfer counters are then partial).  The input file is never
    modified.
    """
    t0 = time.perf_counter()
    mf = _open_input(matrix)
    lay = _pick_layout(mf, max_mem, num_blocks)
    nb, b = lay.n_b, lay.b
    dt = mf.dtype
    ell, sign = 0.0, 1
    with BlockStore(mf, lay, scratch_slots(nb, "generic"), scratch_dir) as store:
        A = np.empty((b, b), dt)
        B = np.empty((b, b), dt) if nb > 1 else None
        C = np.empty((b, b), dt) if nb > 1 else None
        S = np.empty((b, b), dt) if nb > 2 else None
        store.read_block(0, 0, A[:lay.block_size(0), :lay.block_size(0)])
        for k in range(nb):
            hk = lay.block_size(k)
            Ak = A[:hk, :hk]
            piv, la, sg = lu_inplace(Ak)
            ell += la
            sign *= sg
            if sign == 0:
                return GenericResult(-np.inf, 0, _run_info("generic", lay, store, t0))
            if k == nb - 1:
                break
            perm = perm_from_swaps(piv)
            Bv = Cv = None
            for v in _generic_stage(nb, k):
                hi, wj = lay.block_size(v.i), lay.block_size(v.j)
                if v.new_row:
                    Cv = C[:b, :hi]
                    store.read_block(v.i, k, Cv, transpose=True)
                    solve_upper_right_inplace(Ak, Cv)
                if v.load_b:
                    Bv = B[:b, :wj]
                    store.read_block(k, v.j, Bv)
                if v.solve_b:
                    Bv[:] = Bv[perm]
                    solve_lower_inplace(Ak, Bv, unit_diag=True)
                    if v.write_b:
                        store.write_block_scratch(k, v.j, Bv)
                Tv = (A if v.next_diag else S)[:hi, :wj]
                store.read_block(v.i, v.j, Tv)
                schur_update(Tv, Cv, Bv, "ct_b")
                if not v.next_diag:
                    store.write_block_scratch(v.i, v.j, Tv)
        info = _run_info("generic", lay, store, t0)
    return GenericResult(ell, sign, info)


def _memdet_symmetric(matrix, factor, scaled, max_mem, num_blocks,
                      scratch_dir, case_label):
    """Shared driver for the LDL (scaled=True) and Cholesky (False) cases.

    ``factor(Ak)`` returns (perm, d) for the diagonal tile; ``perm`` is None
    when the factorization does not pivot.  Row-k tiles are lower-solved once
    (in the rightmost column), the unscaled solved copy serves the diagonal
    update, and in the scaled case B* additionally carries D^{-1}.
    """
    t0 = time.perf_counter()
    mf = _open_input(matrix)
    if mf.symmetry == "generic":
        raise ValueError("symmetric driver requires a symmetric or spd input file")
    lay = _pick_layout(mf, max_mem, num_blocks)
    nb, b, m = lay.n_b, lay.b, lay.m
    dt = mf.dtype
    d_all = np.empty(m, dt)
    pi = np.arange(m, dtype=np.int64)
    with BlockStore(mf, lay, scratch_slots(nb, "symmetric"), scratch_dir) as store:
        A = np.empty((b, b), dt)
        B = np.empty((b, b), dt) if nb > 1 else None
        C = np.empty((b, b), dt) if nb > 1 else None
        S = np.empty((b, b), dt) if nb > 2 else None
        store.read_block(0, 0, A[:lay.block_size(0), :lay.block_size(0)])
        for k in range(nb):
            hk = lay.block_size(k)
            Ak = A[:hk, :hk]
            perm, dk = factor(Ak)
            off = k * b
            d_all[off:off + hk] = dk
            if perm is not None:
                pi[off:off + hk] = off + perm
            if k == nb - 1:
                break
            Bv = None
            for v in _symmetric_stage(nb, k):
                wi, wj = lay.block_size(v.i), lay.block_size(v.j)
                even = (nb - 1 - v.j) % 2 == 0
                Bst, Cst = (B, C) if even else (C, B)
                if v.col_start:
                    Bv = Bst[:b, :wj]
                    if v.load_b:
                        store.read_block(k, v.j, Bv)
                        if perm is not None:
                            Bv[:] = Bv[perm]
                        solve_lower_inplace(Ak, Bv, unit_diag=scaled)
                    if scaled:
                        # keep a solved, unscaled copy for the diagonal update
                        Cst[:b, :wj][:] = Bv
                        Bv /= dk[:, None]
                if v.i == v.j:
                    Cv = Cst[:b, :wj] if scaled else Bv
                else:
                    Cv = Cst[:b, :wi]
                    store.read_block(k, v.i, Cv)
                    if v.solve_c:
                        if perm is not None:
                            Cv[:] = Cv[perm]
                        solve_lower_inplace(Ak, Cv, unit_diag=scaled)
                        if v.write_c:
                            store.write_block_scratch(k, v.i, Cv)
                Tv = (A if v.next_diag else S)[:wi, :wj]
                store.read_block(v.i, v.j, Tv)
                schur_update(Tv, Cv, Bv, "ct_b")
                if not v.next_diag:
                    store.write_block_scratch(v.i, v.j, Tv)
        info = _run_info(case_label, lay, store, t0)
    return d_all, pi, info


def memdet_ldl(matrix, *, max_mem=None, num_blocks=None, scratch_dir=None,
               prefix_out=None) -> SymmetricResult:
    """Prefix log-determinants of a symmetric matrix via blocked LDL^T.

    The permutation is assembled from per-tile pivots (offset by the tile
    origin), so prefixes refer to the permuted leading submatrices.  Writes
    the (q, prefix, sign) records to ``prefix_out`` when given.
    """
    def factor(Ak):
        swaps, d = ldl_inplace(Ak)
        return perm_from_swaps(swaps), d

    d_all, pi, info = _memdet_symmetric(
        matrix, factor, True, max_mem, num_blocks, scratch_dir, "symmetric")
    prefix = np.cumsum(np.log(np.abs(d_all)))
    signs = np.cumprod(np.sign(d_all)).astype(np.int64)
    result = SymmetricResult(perm=pi, prefix=prefix, prefix_signs=signs, info=info)
    if prefix_out is not None:
        with PrefixWriter(prefix_out) as w:
            w.append(prefix, signs)
    return result


def memdet_cholesky(matrix, *, max_mem=None, num_blocks=None, scratch_dir=None,
                    prefix_out=None) -> SpdResult:
    """Prefix log-determinants of an SPD matrix via blocked Cholesky.

    No pivoting: ``prefix[q-1]`` is exactly logdet of the leading q-by-q
    principal submatrix.  Fails with NotSpdError on any non-positive leading
    minor.
    """
    def factor(Ak):
        return None, cholesky_inplace(Ak)

    d_all, _, info = _memdet_symmetric(
        matrix, factor, False, max_mem, num_blocks, scratch_dir, "spd")
    prefix = np.cumsum(2.0 * np.log(d_all))
    result = SpdResult(prefix=prefix, info=info)
    if prefix_out is not None:
        with PrefixWriter(prefix_out) as w:
            w.append(prefix, np.ones(len(prefix), dtype=np.int64))
    return result
