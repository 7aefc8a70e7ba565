"""NumPy fallback for the LDL^T kernel; same pivoting as the compiled core.

Works on the full square tile (both triangles), which keeps the trailing
update vectorized; the compiled core touches only the lower triangle.  Both
store the identical unit-L/pivot results, up to rounding.
"""

import numpy as np


def ldl_factor(a, swaps, d, work, tol):
    n = a.shape[0]
    diag_idx = np.arange(n)
    for r in range(n):
        trail = np.abs(a[diag_idx[r:], diag_idx[r:]])
        t = r + int(np.argmax(trail))  # argmax takes the first max: lowest index
        swaps[r] = t
        if t != r:
            a[[r, t], :] = a[[t, r], :]
            a[:, [r, t]] = a[:, [t, r]]
        p = a[r, r]
        if abs(p) < tol:
            return r
        d[r] = p
        invp = 1.0 / p
        c = a[r + 1:, r].copy()
        l = c * invp
        # same c_i * (c_j / p) update form as the compiled kernel
        a[r + 1:, r + 1:] -= c[:, None] * l[None, :]
        a[r + 1:, r] = l
    return -1
