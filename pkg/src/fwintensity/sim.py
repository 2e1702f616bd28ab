"""Synthetic designs: Toeplitz-correlated covariates, additive truths,
Cox-duration sampling, and the self-exciting simulator.

All randomness flows through counter-based Philox generators with one
named stream per replication, so parallel runs reproduce serial ones
byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .backend import duration_root
from .errors import CholeskyFailure, ExplosionGuard, InvalidUniform
from .timeline import EventTimeline, build_timeline

GAMMA_STREAM = 2**32  # stream id reserved for the centering estimate


def rng_stream(seed: int, stream: int) -> np.random.Generator:
    """Philox generator for one (seed, stream) pair."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([int(seed), int(stream)]))
    )


@dataclass(frozen=True)
class SimDesign:
    """One synthetic configuration: dimensions, correlation, truth shape,
    active-coefficient profile, covariate dynamics, and optional
    self-excitation (c0, a0)."""

    K: int = 10
    rho: float = 0.0
    truth: str = "linear"        # or "convex"
    profile: str = "fewlarge"    # "manysmall", or "null" (custom: g0 = 0)
    dynamics: str = "iid"        # or "var1"
    n: int = 1100
    hawkes: tuple | None = None  # (c0, a0)
    seed: int = 0
    var_phi: float = 0.95
    clip: float = 2.0

    def __post_init__(self):
        if self.truth not in ("linear", "convex"):
            raise ValueError(f"unknown truth {self.truth!r}")
        if self.profile not in ("fewlarge", "manysmall", "null"):
            raise ValueError(f"unknown profile {self.profile!r}")
        if self.dynamics not in ("iid", "var1"):
            raise ValueError(f"unknown dynamics {self.dynamics!r}")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must be in [0, 1)")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hawkes"] = None if self.hawkes is None else list(self.hawkes)
        return d


def truth_coefficients(design: SimDesign) -> np.ndarray:
    b = np.zeros(design.K)
    if design.profile == "fewlarge":
        b[: min(3, design.K)] = 1.0
    elif design.profile == "manysmall":
        b[: min(10, design.K)] = 1.0 / math.sqrt(10.0)
    return b


def true_g0_values(design: SimDesign, X: np.ndarray, gamma: float = 0.0) -> np.ndarray:
    """Additive truth at covariate rows: linear b_k x_k or convex
    b_k (|x_k| + 0.5 x_k), plus the centering constant."""
    X = np.atleast_2d(X)
    b = truth_coefficients(design)
    if design.truth == "linear":
        return X @ b + gamma
    return (np.abs(X) + 0.5 * X) @ b + gamma


def true_g0(design: SimDesign, x, gamma: float = 0.0) -> float:
    return float(true_g0_values(design, np.atleast_2d(np.asarray(x, float)), gamma)[0])


def toeplitz_cholesky(K: int, rho: float) -> np.ndarray:
    cov = rho ** np.abs(np.subtract.outer(np.arange(K), np.arange(K)))
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(f"Toeplitz(rho={rho}) is not positive definite") from exc


def _innovations(design: SimDesign, n_rows: int, rng: np.random.Generator,
                 chol: np.ndarray) -> np.ndarray:
    z = rng.standard_normal((n_rows, design.K))
    return np.clip(z @ chol.T, -design.clip, design.clip)


def gen_covariates(design: SimDesign, n_rows: int | None = None,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Covariate rows X(T_0)..X(T_n), all entries in [-clip, clip].

    iid mode draws clipped Toeplitz Gaussians; var1 mode runs the
    autoregression X_i = clip(phi X_{i-1} + eps_i) with clipped Gaussian
    innovations and X_0 = eps_0.
    """
    if n_rows is None:
        n_rows = design.n + 1
    if rng is None:
        rng = rng_stream(design.seed, 0)
    chol = toeplitz_cholesky(design.K, design.rho)
    eps = _innovations(design, n_rows, rng, chol)
    if design.dynamics == "iid":
        return eps
    X = np.empty_like(eps)
    X[0] = eps[0]
    for i in range(1, n_rows):
        X[i] = np.clip(design.var_phi * X[i - 1] + eps[i],
                       -design.clip, design.clip)
    return X


def centering_gamma(design: SimDesign, mc_draws: int = 1_000_000,
                    rng: np.random.Generator | None = None):
    """Monte Carlo estimate of gamma = -ln E exp{sum_k g0k(X)} under the
    design's covariate law, so that E exp{g0 + gamma} = 1.

    Returns (gamma, standard error). iid designs average over fresh draws;
    var1 designs average over parallel chains after burn-in, with the
    standard error taken across chain means.
    """
    if design.profile == "null":
        return 0.0, 0.0
    if rng is None:
        rng = rng_stream(design.seed, GAMMA_STREAM)
    chol = toeplitz_cholesky(design.K, design.rho)
    if design.dynamics == "iid":
        total = total_sq = 0.0
        count = 0
        chunk = 100_000
        while count < mc_draws:
            m = min(chunk, mc_draws - count)
            vals = np.exp(true_g0_values(design, _innovations(design, m, rng, chol)))
            total += float(np.sum(vals))
            total_sq += float(np.dot(vals, vals))
            count += m
        mean = total / count
        var = max(total_sq / count - mean**2, 0.0)
        se_mean = math.sqrt(var / count)
    else:
        chains = 200
        burn = 500
        steps = max(int(math.ceil(mc_draws / chains)), 1)
        state = _innovations(design, chains, rng, chol)
        chain_sums = np.zeros(chains)
        for t in range(burn + steps):
            eps = _innovations(design, chains, rng, chol)
            state = np.clip(design.var_phi * state + eps,
                            -design.clip, design.clip)
            if t >= burn:
                chain_sums += np.exp(true_g0_values(design, state))
        chain_means = chain_sums / steps
        mean = float(np.mean(chain_means))
        se_mean = float(np.std(chain_means, ddof=1) / math.sqrt(chains))
    gamma = -math.log(mean)
    se_gamma = se_mean / mean
    return gamma, se_gamma


def _timeline_from_jumps(jumps: np.ndarray, X: np.ndarray) -> EventTimeline:
    update_times = np.concatenate([[0.0], jumps])
    return build_timeline(list(zip(update_times, X)), jumps, jumps[-1])


def simulate_cox(design: SimDesign, gamma: float = 0.0,
                 rng: np.random.Generator | None = None,
                 n: int | None = None) -> EventTimeline:
    """Doubly stochastic sample: interval i is Exp(1) / exp{g0(X(T_{i-1}))}
    and covariates update exactly at the jump times."""
    if n is None:
        n = design.n
    if rng is None:
        rng = rng_stream(design.seed, 0)
    X = gen_covariates(design, n + 1, rng)
    g = true_g0_values(design, X[:-1], gamma)
    e = rng.exponential(size=n)
    durations = e / np.exp(g)
    jumps = np.cumsum(durations)
    return _timeline_from_jumps(jumps, X)


def simulate_hawkes_cov(design: SimDesign, gamma: float,
                        rng: np.random.Generator | None = None,
                        n: int | None = None,
                        z_ceiling: float = 1e6) -> EventTimeline:
    """Self-exciting sample by exact inversion of the compensator.

    Each interval solves c0 Y s + (Y Z / a0)(1 - e^{-a0 s}) = -ln U for s;
    the excitation state follows the seeded recursion. Aborts when Z
    exceeds the stability ceiling.
    """
    if design.hawkes is None:
        raise ValueError("design has no (c0, a0) excitation parameters")
    c0, a0 = float(design.hawkes[0]), float(design.hawkes[1])
    if n is None:
        n = design.n
    if rng is None:
        rng = rng_stream(design.seed, 0)
    X = gen_covariates(design, n + 1, rng)
    g = true_g0_values(design, X[:-1], gamma)
    u = rng.random(n)
    jumps = np.empty(n)
    t = 0.0
    z = 1.0
    for i in range(n):
        if z > z_ceiling:
            raise ExplosionGuard(f"excitation state {z} exceeded {z_ceiling}")
        if not 0.0 < u[i] < 1.0:
            raise InvalidUniform("degenerate uniform draw")
        y = math.exp(g[i])
        r = duration_root(c0 * y, y * z, a0, -math.log(u[i]))
        t += r
        jumps[i] = t
        z = z * math.exp(-a0 * r) + 1.0
    return _timeline_from_jumps(jumps, X)
