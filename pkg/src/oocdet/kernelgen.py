"""Kernel Gram matrices and random test matrices, written as matrix files.

The flagship generator is the multi-output spatial covariance: an isotropic
Matern correlation over random points in [0, 1]^p combined with per-point
local covariances through coregionalization,

    block(x, x') = sigma(x)^(1/2) sigma(x')^(1/2) rho(x, x'),

yielding an SPD Gram of size (n*d) x (n*d).  Local covariances default to
seeded Wishart-style draws A A^T + (d/10) I, or the identity with
``unit_sigma`` (d = 1 with unit sigma gives the plain Matern correlation
matrix).  Also provided: an RBF Gram, random SPD / symmetric-indefinite /
unsymmetric matrices, and the Gaussian-process conditional-variance oracle
used to cross-check determinant ratios in the scalar case.

Generation is deterministic for a fixed seed, and symmetric kinds are
mirrored block-by-block so stored data is bit-exactly symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gammaln, kv

from .errors import NotSpdError
from .storage import MatrixFile

GRAM_KINDS = ("matern-lmc", "rbf", "spd-random", "sym-random", "gen-random")

# distances below ZERO_DIST_RTOL * alpha are treated as coincident points
ZERO_DIST_RTOL = 1e-14


@dataclass(frozen=True)
class MaternParams:
    alpha: float   # correlation scale, input-space units
    nu: float      # smoothness

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"correlation scale must be > 0, got {self.alpha}")
        if not self.nu > 0:
            raise ValueError(f"smoothness must be > 0, got {self.nu}")


def _matern_half_integer(z: np.ndarray, p: int) -> np.ndarray:
    # rho = exp(-z) * (p! / (2p)!) * sum_i (p+i)!/(i!(p-i)!) (2z)^(p-i)
    acc = np.zeros_like(z)
    for i in range(p + 1):
        coef = math.factorial(p + i) / (math.factorial(i) * math.factorial(p - i))
        acc += coef * (2.0 * z) ** (p - i)
    return np.exp(-z) * (math.factorial(p) / math.factorial(2 * p)) * acc


def matern_corr_r(r, params: MaternParams) -> np.ndarray:
    """Matern correlation as a function of distance; rho(0) = 1 exactly.

    Half-integer smoothness uses the closed polynomial-times-exponential
    forms; other orders go through the modified Bessel function K_nu.
    """
    r = np.asarray(r, dtype=np.float64)
    z = math.sqrt(2.0 * params.nu) * r / params.alpha
    near = r < ZERO_DIST_RTOL * params.alpha
    two_nu = 2.0 * params.nu
    if abs(two_nu - round(two_nu)) < 1e-12 and int(round(two_nu)) % 2 == 1:
        p = (int(round(two_nu)) - 1) // 2
        rho = _matern_half_integer(np.where(near, 1.0, z), p)
    else:
        lognorm = (1.0 - params.nu) * math.log(2.0) - gammaln(params.nu)
        zs = np.where(near, 1.0, z)  # dummy value at the removable singularity
        rho = np.exp(lognorm + params.nu * np.log(zs)) * kv(params.nu, zs)
    return np.where(near, 1.0, rho)


def matern_corr(x, x_prime, params: MaternParams) -> float:
    """Correlation between two points."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    x_prime = np.atleast_1d(np.asarray(x_prime, dtype=np.float64))
    return float(matern_corr_r(np.linalg.norm(x - x_prime), params))


def spd_sqrt(sigma: np.ndarray) -> np.ndarray:
    """Symmetric square root of an SPD matrix via its spectral decomposition."""
    sigma = np.asarray(sigma, dtype=np.float64)
    w, v = np.linalg.eigh(sigma)
    floor = -len(w) * np.finfo(np.float64).eps * max(float(w[-1]), 0.0)
    if w[0] <= floor or w[-1] <= 0.0:
        raise NotSpdError(f"matrix is not positive-definite (min eigenvalue {w[0]:.3e})")
    return (v * np.sqrt(np.maximum(w, 0.0))) @ v.T


@dataclass(frozen=True)
class LmcField:
    """Spatial points with per-point local output covariances."""

    points: np.ndarray      # (n, p)
    sigma: np.ndarray       # (n, d, d), each SPD

    @cached_property
    def roots(self) -> np.ndarray:
        return np.stack([spd_sqrt(s) for s in self.sigma])

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.sigma.shape[1]


def lmc_block(field: LmcField, i: int, j: int, params: MaternParams) -> np.ndarray:
    """d-by-d covariance block between points i and j of the field."""
    rho = matern_corr(field.points[i], field.points[j], params)
    return (field.roots[i] @ field.roots[j]) * rho


def random_lmc_field(n: int, d: int, p: int, rng, unit_sigma: bool = False) -> LmcField:
    """Uniform points on [0, 1]^p with Wishart-style (or identity) sigma."""
    points = rng.uniform(0.0, 1.0, (n, p))
    if unit_sigma:
        sigma = np.broadcast_to(np.eye(d), (n, d, d)).copy()
    else:
        sigma = np.empty((n, d, d))
        for i in range(n):
            a = rng.standard_normal((d, d))
            sigma[i] = a @ a.T + (d / 10.0) * np.eye(d)
    return LmcField(points=points, sigma=sigma)


def _write_symmetric_chunks(mm, m, block_rows, make_rows):
    """Fill a symmetric matrix from its upper triangle, mirroring exactly.

    ``make_rows(r0, r1)`` must return rows r0..r1 restricted to columns
    r0.. (the upper-triangle part); the strict lower triangle is written as
    the bit-exact transpose, including inside the diagonal square.
    """
    for r0 in range(0, m, block_rows):
        r1 = min(m, r0 + block_rows)
        upper = make_rows(r0, r1)
        low_r, low_c = np.tril_indices(r1 - r0, -1)
        upper[low_r, low_c] = upper[low_c, low_r]
        mm[r0:r1, r0:] = upper
        mm[r0:, r0:r1][r1 - r0:] = upper[:, r1 - r0:].T


def gen_gram(kind: str, n: int, d: int = 1, p: int = 2,
             alpha: float | None = None, nu: float | None = None,
             seed: int = 0, out=None, jitter: float = 0.0,
             unit_sigma: bool = False, block_rows: int = 256) -> MatrixFile:
    """Generate a matrix of the requested kind into a matrix file.

    matern-lmc and rbf build an m x m Gram with m = n*d; the random kinds
    are m = n*d test matrices with no kernel structure.  For rbf, ``alpha``
    is the length scale and 0 degenerates to the identity matrix.
    Deterministic for fixed arguments: identical calls produce identical
    files byte for byte.
    """
    if kind not in GRAM_KINDS:
        raise ValueError(f"unknown kind {kind!r}; choose from {GRAM_KINDS}")
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be >= 1, got n={n}, d={d}")
    if out is None:
        raise ValueError("an output path is required")
    rng = np.random.default_rng(seed)
    m = n * d

    if kind == "matern-lmc":
        if alpha is None or nu is None:
            raise ValueError("matern-lmc requires alpha and nu")
        params = MaternParams(alpha, nu)
        field = random_lmc_field(n, d, p, rng, unit_sigma=unit_sigma)
        roots = field.roots
        mf = MatrixFile.create(out, m, "f64", "spd")
        mm = mf.memmap(mode="r+")
        rows_per = max(1, block_rows // d)

        def make_rows(r0, r1):
            i0, i1 = r0 // d, r1 // d
            rho = matern_corr_r(
                cdist(field.points[i0:i1], field.points[i0:]), params)
            blk = np.einsum("iab,jbc->iajc", roots[i0:i1], roots[i0:],
                            optimize=True)
            blk *= rho[:, None, :, None]
            out_rows = blk.reshape((i1 - i0) * d, (n - i0) * d)
            if jitter:
                for r in range(r1 - r0):
                    out_rows[r, r] += jitter
            return out_rows

        _write_symmetric_chunks(mm, m, rows_per * d, make_rows)
        mm.flush()
        del mm
        return mf

    if kind == "rbf":
        if alpha is None or alpha < 0:
            raise ValueError("rbf requires a length scale alpha >= 0")
        points = rng.uniform(0.0, 1.0, (m, p))
        mf = MatrixFile.create(out, m, "f64", "spd")
        mm = mf.memmap(mode="r+")

        def make_rows(r0, r1):
            if alpha == 0.0:
                vals = np.zeros((r1 - r0, m - r0))
            else:
                r = cdist(points[r0:r1], points[r0:])
                vals = np.exp(-0.5 * (r / alpha) ** 2)
            for k in range(r1 - r0):
                vals[k, k] = 1.0 + jitter
            return vals

        _write_symmetric_chunks(mm, m, block_rows, make_rows)
        mm.flush()
        del mm
        return mf

    if kind == "spd-random":
        g = rng.standard_normal((m, m))
        mat = (g @ g.T) / m + np.eye(m)
        symmetry = "spd"
    elif kind == "sym-random":
        g = rng.standard_normal((m, m))
        mat = np.tril(g) + np.tril(g, -1).T  # exactly symmetric, indefinite
        symmetry = "symmetric"
    else:  # gen-random
        mat = rng.standard_normal((m, m))
        symmetry = "generic"
    if jitter:
        mat[np.diag_indices(m)] += jitter
    if symmetry == "spd":
        mat = np.tril(mat) + np.tril(mat, -1).T  # enforce bit symmetry
    mf = MatrixFile.create(out, m, "f64", symmetry)
    mm = mf.memmap(mode="r+")
    mm[:] = mat
    mm.flush()
    del mm
    return mf


def gp_conditional_error(gram: np.ndarray) -> np.ndarray:
    """Conditional variances E(n) of a scalar-output GP at each new point.

    E(n) = K[n,n] - k_{n-1}(x_n)^T K_{n-1}^{-1} k_{n-1}(x_n) for n = 2..N,
    which equals the ratio det(K_n)/det(K_{n-1}) by the Schur determinant
    identity.  Returned array is indexed by n - 2.
    """
    k_full = np.asarray(gram, dtype=np.float64)
    n_max = k_full.shape[0]
    if k_full.shape != (n_max, n_max) or n_max < 2:
        raise ValueError(f"need a square Gram of size >= 2, got {k_full.shape}")
    out = np.empty(n_max - 1)
    for n in range(2, n_max + 1):
        lead = k_full[:n - 1, :n - 1]
        cross = k_full[:n - 1, n - 1]
        try:
            solved = np.linalg.solve(lead, cross)
        except np.linalg.LinAlgError as exc:
            raise NotSpdError(f"leading {n - 1}x{n - 1} submatrix is singular") from exc
        out[n - 2] = k_full[n - 1, n - 1] - cross @ solved
    return out
