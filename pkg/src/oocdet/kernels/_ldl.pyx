# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled in-place LDL^T factorization with 1x1 diagonal pivoting.

At each step the largest-magnitude diagonal entry of the trailing submatrix
is chosen as pivot (lowest index on ties) and brought to the front by a
symmetric row/column swap.  Only the lower triangle is referenced and
updated; on exit the strictly lower triangle holds the unit L factor for the
permuted matrix and ``d`` holds the pivots.

Returns -1 on success, or the step index whose pivot magnitude fell below
``tol`` (the caller raises).
"""

from libc.math cimport fabs

ctypedef fused floating:
    float
    double


def ldl_factor(floating[:, :] a, long long[::1] swaps, floating[::1] d,
               floating[::1] work, double tol):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t r, i, j, t
    cdef floating tmp, p, invp, ci, best
    cdef int fail = -1

    with nogil:
        for r in range(n):
            # pivot search over the trailing diagonal, first max wins
            t = r
            best = fabs(a[r, r])
            for i in range(r + 1, n):
                if fabs(a[i, i]) > best:
                    best = fabs(a[i, i])
                    t = i
            swaps[r] = t
            if t != r:
                # symmetric swap of indices r and t within the lower triangle
                for j in range(r):
                    tmp = a[r, j]; a[r, j] = a[t, j]; a[t, j] = tmp
                tmp = a[r, r]; a[r, r] = a[t, t]; a[t, t] = tmp
                for i in range(r + 1, t):
                    tmp = a[i, r]; a[i, r] = a[t, i]; a[t, i] = tmp
                for i in range(t + 1, n):
                    tmp = a[i, r]; a[i, r] = a[i, t]; a[i, t] = tmp
            p = a[r, r]
            if fabs(p) < tol:
                fail = <int>r
                break
            d[r] = p
            invp = <floating>1.0 / p
            for i in range(r + 1, n):
                work[i] = a[i, r] * invp
            for i in range(r + 1, n):
                ci = a[i, r]
                for j in range(r + 1, i + 1):
                    a[i, j] -= ci * work[j]
            for i in range(r + 1, n):
                a[i, r] = work[i]
    return fail
