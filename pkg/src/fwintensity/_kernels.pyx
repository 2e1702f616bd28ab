# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: segment likelihood sums, the golden-section line
search, self-excitation recursions, and the duration root solve.

`_kernels_py` provides the same signatures in pure numpy; `backend` picks
one at import time.
"""

from libc.math cimport exp, log, fabs

import numpy as np

BACKEND = "cython"


cpdef double loglik(const double[::1] fj, const double[::1] fs, const double[::1] w):
    """Sum of fj minus the w-weighted integral of exp(fs)."""
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(fj.shape[0]):
        s += fj[i]
    for i in range(fs.shape[0]):
        s -= exp(fs[i]) * w[i]
    return s


cdef inline double _objective(double rho, double a0, double a1,
                              const double[::1] fs0, const double[::1] fs1,
                              const double[::1] w):
    cdef Py_ssize_t i
    cdef double s = (1.0 - rho) * a0 + rho * a1
    cdef double omr = 1.0 - rho
    for i in range(fs0.shape[0]):
        s -= exp(omr * fs0[i] + rho * fs1[i]) * w[i]
    return s


cpdef tuple golden_rho(double sum_fj0, double sum_fj1,
                       const double[::1] fs0, const double[::1] fs1,
                       const double[::1] w, double tol=1e-8):
    """Maximize the mixed log-likelihood over rho in [0, 1].

    Golden-section search down to interval width `tol`, endpoints checked;
    ties resolve to rho = 0. Returns (rho, value).
    """
    cdef double invphi = 0.6180339887498949
    cdef double a = 0.0, b = 1.0
    cdef double c = b - invphi * (b - a)
    cdef double d = a + invphi * (b - a)
    cdef double fc = _objective(c, sum_fj0, sum_fj1, fs0, fs1, w)
    cdef double fd = _objective(d, sum_fj0, sum_fj1, fs0, fs1, w)
    while b - a > tol:
        if fc > fd:
            b = d
            d = c
            fd = fc
            c = b - invphi * (b - a)
            fc = _objective(c, sum_fj0, sum_fj1, fs0, fs1, w)
        else:
            a = c
            c = d
            fc = fd
            d = a + invphi * (b - a)
            fd = _objective(d, sum_fj0, sum_fj1, fs0, fs1, w)
    cdef double x = 0.5 * (a + b)
    cdef double fx = _objective(x, sum_fj0, sum_fj1, fs0, fs1, w)
    cdef double f0 = _objective(0.0, sum_fj0, sum_fj1, fs0, fs1, w)
    cdef double f1 = _objective(1.0, sum_fj0, sum_fj1, fs0, fs1, w)
    cdef double best_rho = 0.0
    cdef double best_val = f0
    if fx > best_val:
        best_rho = x
        best_val = fx
    if f1 > best_val:
        best_rho = 1.0
        best_val = f1
    return best_rho, best_val


cpdef object hawkes_z(const double[::1] jump_times, double a):
    """State recursion Z[i] = Z[i-1]*exp(-a*(T_i - T_{i-1})) + 1, Z[0] = 1.

    Index 0 corresponds to the origin time 0; length is n_jumps + 1.
    """
    cdef Py_ssize_t n = jump_times.shape[0]
    z_arr = np.empty(n + 1, dtype=np.float64)
    cdef double[::1] z = z_arr
    cdef Py_ssize_t i
    cdef double prev_t = 0.0
    z[0] = 1.0
    for i in range(n):
        z[i + 1] = z[i] * exp(-a * (jump_times[i] - prev_t)) + 1.0
        prev_t = jump_times[i]
    return z_arr


cpdef object disc_counts(const double[::1] times, const long[::1] njumps,
                         const double[::1] jump_times, double a):
    """Exponentially discounted jump count at each query point.

    For point i, sums exp(-a*(times[i] - T_j)) over the first njumps[i]
    jumps. `times` must be ascending and `njumps` nondecreasing.
    """
    cdef Py_ssize_t m = times.shape[0]
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef Py_ssize_t consumed = 0
    cdef double acc = 0.0
    cdef double prev_t = 0.0
    cdef double t
    for i in range(m):
        t = times[i]
        acc *= exp(-a * (t - prev_t))
        for j in range(consumed, njumps[i]):
            acc += exp(-a * (t - jump_times[j]))
        consumed = njumps[i]
        prev_t = t
        out[i] = acc
    return out_arr


cpdef double duration_root(double c1, double c2, double a0, double q):
    """Solve c1*s + (c2/a0)*(1 - exp(-a0*s)) = q for s >= 0.

    Bisection on [0, q/c1], then Newton polish to 1e-12 absolute.
    """
    if c2 == 0.0:
        return q / c1
    cdef double lo = 0.0
    cdef double hi = q / c1
    cdef double mid, h, step
    cdef Py_ssize_t i
    for i in range(60):
        mid = 0.5 * (lo + hi)
        h = c1 * mid + (c2 / a0) * (1.0 - exp(-a0 * mid)) - q
        if h > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-9:
            break
    cdef double s = 0.5 * (lo + hi)
    for i in range(50):
        h = c1 * s + (c2 / a0) * (1.0 - exp(-a0 * s)) - q
        step = h / (c1 + c2 * exp(-a0 * s))
        s -= step
        if fabs(step) < 1e-12:
            break
    if s < 0.0:
        s = 0.0
    return s
