# cython: language_level=3
"""Cyclic Jacobi eigensolver for symmetric matrices, compiled kernel.

Same algorithm and sweep order as the pure NumPy fallback so both
backends agree to rounding error.
"""
import numpy as np

cimport cython
from libc.math cimport fabs, sqrt


@cython.boundscheck(False)
@cython.wraparound(False)
def jacobi_eigh(object matrix, double tol=1e-12, int max_sweeps=100):
    a_arr = np.array(matrix, dtype=np.float64)
    if a_arr.ndim != 2 or a_arr.shape[0] != a_arr.shape[1]:
        raise ValueError("matrix must be square")
    cdef Py_ssize_t n = a_arr.shape[0]
    v_arr = np.eye(n, dtype=np.float64)
    if n < 2:
        return np.diag(a_arr).copy(), v_arr

    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, r, sweep
    cdef double apq, theta, t, c, s, off, scale, x, y

    scale = 0.0
    for p in range(n):
        for q in range(n):
            scale += a[p, q] * a[p, q]
    scale = sqrt(scale)
    if scale < 1.0:
        scale = 1.0

    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(1, n):
            for q in range(p):
                off += a[p, q] * a[p, q]
        off = sqrt(2.0 * off)
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if fabs(apq) < 1e-300:
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if fabs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                else:
                    t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for r in range(n):
                    x = a[p, r]
                    y = a[q, r]
                    a[p, r] = c * x - s * y
                    a[q, r] = s * x + c * y
                for r in range(n):
                    x = a[r, p]
                    y = a[r, q]
                    a[r, p] = c * x - s * y
                    a[r, q] = s * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0
                for r in range(n):
                    x = v[r, p]
                    y = v[r, q]
                    v[r, p] = c * x - s * y
                    v[r, q] = s * x + c * y

    vals = np.diag(a_arr).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], v_arr[:, order]
