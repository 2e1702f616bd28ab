"""Pure-numpy fallback for the compiled kernels in `_kernels.pyx`.

Same signatures and semantics; only summation order (and hence the last
couple of float bits) may differ from the compiled versions.
"""

import math

import numpy as np

BACKEND = "python"

_INVPHI = 0.6180339887498949


def loglik(fj, fs, w):
    """Sum of fj minus the w-weighted integral of exp(fs)."""
    return float(np.sum(fj) - np.dot(np.exp(fs), w))


def _objective(rho, a0, a1, fs0, fs1, w):
    with np.errstate(over="ignore"):
        seg = np.dot(np.exp((1.0 - rho) * fs0 + rho * fs1), w)
    return (1.0 - rho) * a0 + rho * a1 - seg


def golden_rho(sum_fj0, sum_fj1, fs0, fs1, w, tol=1e-8):
    """Maximize the mixed log-likelihood over rho in [0, 1].

    Golden-section search down to interval width `tol`, endpoints checked;
    ties resolve to rho = 0. Returns (rho, value).
    """
    a, b = 0.0, 1.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc = _objective(c, sum_fj0, sum_fj1, fs0, fs1, w)
    fd = _objective(d, sum_fj0, sum_fj1, fs0, fs1, w)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = _objective(c, sum_fj0, sum_fj1, fs0, fs1, w)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = _objective(d, sum_fj0, sum_fj1, fs0, fs1, w)
    x = 0.5 * (a + b)
    fx = _objective(x, sum_fj0, sum_fj1, fs0, fs1, w)
    f0 = _objective(0.0, sum_fj0, sum_fj1, fs0, fs1, w)
    f1 = _objective(1.0, sum_fj0, sum_fj1, fs0, fs1, w)
    best_rho, best_val = 0.0, f0
    if fx > best_val:
        best_rho, best_val = x, fx
    if f1 > best_val:
        best_rho, best_val = 1.0, f1
    return best_rho, best_val


def hawkes_z(jump_times, a):
    """State recursion Z[i] = Z[i-1]*exp(-a*(T_i - T_{i-1})) + 1, Z[0] = 1.

    Index 0 corresponds to the origin time 0; length is n_jumps + 1.
    """
    n = len(jump_times)
    z = np.empty(n + 1)
    z[0] = 1.0
    prev_t = 0.0
    for i in range(n):
        z[i + 1] = z[i] * math.exp(-a * (jump_times[i] - prev_t)) + 1.0
        prev_t = jump_times[i]
    return z


def disc_counts(times, njumps, jump_times, a):
    """Exponentially discounted jump count at each query point.

    For point i, sums exp(-a*(times[i] - T_j)) over the first njumps[i]
    jumps. `times` must be ascending and `njumps` nondecreasing.
    """
    out = np.empty(len(times))
    acc = 0.0
    prev_t = 0.0
    consumed = 0
    for i, t in enumerate(times):
        acc *= math.exp(-a * (t - prev_t))
        k = njumps[i]
        if k > consumed:
            acc += np.sum(np.exp(-a * (t - jump_times[consumed:k])))
            consumed = k
        prev_t = t
        out[i] = acc
    return out


def duration_root(c1, c2, a0, q):
    """Solve c1*s + (c2/a0)*(1 - exp(-a0*s)) = q for s >= 0.

    Bisection on [0, q/c1], then Newton polish to 1e-12 absolute.
    """
    if c2 == 0.0:
        return q / c1
    lo, hi = 0.0, q / c1
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        h = c1 * mid + (c2 / a0) * (1.0 - math.exp(-a0 * mid)) - q
        if h > 0.0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-9:
            break
    s = 0.5 * (lo + hi)
    for _ in range(50):
        h = c1 * s + (c2 / a0) * (1.0 - math.exp(-a0 * s)) - q
        step = h / (c1 + c2 * math.exp(-a0 * s))
        s -= step
        if abs(step) < 1e-12:
            break
    return max(s, 0.0)
