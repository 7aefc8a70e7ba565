import numpy as np
import pytest

from oocdet import MatrixFile


def write_matrix(path, values, symmetry):
    """Create a matrix file holding ``values`` (which must match symmetry)."""
    values = np.asarray(values)
    mf = MatrixFile.create(path, values.shape[0], values.dtype, symmetry)
    mm = mf.memmap("r+")
    mm[:] = values
    mm.flush()
    del mm
    return mf


def random_symmetric(rng, m, diag_shift=4.0):
    """Symmetric indefinite test matrix with a healthy mixed-sign diagonal.

    1x1 diagonal pivoting is only guaranteed well-behaved away from hard
    indefinite cases, so the diagonal is boosted while keeping both signs
    present.
    """
    g = rng.standard_normal((m, m))
    mat = np.tril(g) + np.tril(g, -1).T
    signs = np.where(rng.random(m) < 0.5, -1.0, 1.0)
    mat[np.diag_indices(m)] += diag_shift * signs
    return mat


def random_spd(rng, m, shift=1.0):
    g = rng.standard_normal((m, m))
    mat = g @ g.T / m + shift * np.eye(m)
    return np.tril(mat) + np.tril(mat, -1).T


def cofactor_det(a):
    """Brute-force determinant by cofactor expansion (first row)."""
    a = np.asarray(a, dtype=np.float64)
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * a[0, j] * cofactor_det(minor)
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
