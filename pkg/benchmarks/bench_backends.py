#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Times the individual hot kernels and a full Frank-Wolfe fit under each
backend, checks that the results agree, and prints a table. Run from the
repository root:

    python benchmarks/bench_backends.py
"""

import time

import numpy as np

from fwintensity import _kernels_py, fw, likelihood
from fwintensity.backend import kernels as compiled
from fwintensity.dictionary import DictionaryConfig
from fwintensity.fw import FitConfig, fit
from fwintensity.sim import SimDesign, rng_stream, simulate_cox
from fwintensity.timeline import PreprocessTransform


def time_call(fun, *args, repeat=200):
    fun(*args)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        out = fun(*args)
    return (time.perf_counter() - t0) / repeat, out


def bench_kernels():
    rng = np.random.default_rng(0)
    n = 400
    fs0 = rng.normal(size=n)
    fs1 = rng.normal(size=n)
    w = rng.uniform(0.05, 0.5, size=n)
    fj = rng.normal(size=100)
    jumps = np.sort(rng.uniform(0, 40, 300))
    times = np.sort(rng.uniform(0, 40, 400))
    njumps = np.searchsorted(jumps, times, side="right").astype(np.int64)

    cases = [
        ("loglik", (fj, fs0, w), "loglik"),
        ("golden_rho", (1.0, 2.0, fs0, fs1, w), "golden_rho"),
        ("hawkes_z", (jumps, 1.3), "hawkes_z"),
        ("disc_counts", (times, njumps, jumps, 1.3), "disc_counts"),
        ("duration_root", (2.0, 3.0, 1.3, 1.7), "duration_root"),
    ]
    print(f"{'kernel':14s} {'compiled':>12s} {'fallback':>12s} {'speedup':>9s}")
    for name, args, attr in cases:
        tc, out_c = time_call(getattr(compiled, attr), *args)
        tp, out_p = time_call(getattr(_kernels_py, attr), *args)
        if name == "golden_rho":
            agree = abs(out_c[1] - out_p[1]) < 1e-9
        else:
            agree = np.allclose(out_c, out_p, rtol=1e-10, atol=1e-10)
        assert agree, f"{name}: backends disagree"
        print(f"{name:14s} {tc * 1e6:10.1f}us {tp * 1e6:10.1f}us "
              f"{tp / tc:8.1f}x")


def bench_fit():
    design = SimDesign(K=10, rho=0.0, truth="linear", profile="fewlarge",
                       n=100, seed=12)
    tl = PreprocessTransform.fixed(10, 2.0).apply(
        simulate_cox(design, rng=rng_stream(12, 0))
    )
    dcfg = DictionaryConfig(families=("intercept", "linear"),
                            weight_scheme="empirical_l2")
    fcfg = FitConfig(budget=8.0, iterations=200)

    t_compiled, (m_c, _) = time_call(fit, tl, dcfg, fcfg, repeat=20)

    saved = (fw.golden_rho, likelihood._loglik_kernel)
    fw.golden_rho = _kernels_py.golden_rho
    likelihood._loglik_kernel = _kernels_py.loglik
    try:
        t_fallback, (m_p, _) = time_call(fit, tl, dcfg, fcfg, repeat=20)
    finally:
        fw.golden_rho, likelihood._loglik_kernel = saved

    drift = max(
        (abs(c1 - c2) for (_, c1), (_, c2) in zip(m_c.terms, m_p.terms)),
        default=0.0,
    )
    print(f"\nfull fit (K=10, n=100, 200 iterations):")
    print(f"  compiled {t_compiled * 1e3:8.2f} ms")
    print(f"  fallback {t_fallback * 1e3:8.2f} ms   "
          f"speedup {t_fallback / t_compiled:.1f}x")
    print(f"  max coefficient drift between backends: {drift:.2e}")
    assert drift < 1e-6


if __name__ == "__main__":
    print(f"active backend: {compiled.BACKEND}\n")
    bench_kernels()
    bench_fit()
