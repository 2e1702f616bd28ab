"""Self-exciting (Hawkes-with-covariates) intensity machinery.

The intensity is lambda(t) = (c + sum_{T_j < t} exp(-a (t - T_j))) *
exp{g(X(t))}. The excitation state follows the linear recursion
Z_i = Z_{i-1} exp(-a (T_i - T_{i-1})) + 1 with seed Z_0 = 1 at time 0
(the seed convention changes small-sample values but matches the
simulation design), which makes compensator increments and the
log-likelihood exact in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .backend import duration_root, hawkes_z
from .dictionary import DictionaryConfig
from .errors import InvalidUniform, NoJumps, NonFiniteLikelihood
from .fw import FitConfig, fit_on_state
from .likelihood import LikelihoodState, build_state
from .timeline import EventTimeline


@dataclass(frozen=True)
class HawkesParams:
    """Baseline c > 0 and decay a > 0."""

    c: float
    a: float

    def __post_init__(self):
        if self.c <= 0 or self.a <= 0:
            raise ValueError("baseline and decay must be positive")

    def to_dict(self) -> dict:
        return {"c": float(self.c), "a": float(self.a)}


@dataclass(frozen=True)
class HawkesState:
    """Excitation values Z_i at times (0, T_1, ..., T_n); Z_0 = 1."""

    z: np.ndarray

    def __len__(self):
        return len(self.z)


def hawkes_state(jump_times, a: float) -> HawkesState:
    """Run the excitation recursion over ascending jump times."""
    jump_times = np.ascontiguousarray(jump_times, dtype=float)
    return HawkesState(hawkes_z(jump_times, a))


def compensator_increment(c: float, a: float, z_prev: float, r: float,
                          y: float) -> float:
    """Integral of the intensity over one inter-jump interval of length r,
    with excitation z_prev at the left endpoint and covariate factor y."""
    return (c * r + (z_prev / a) * (1.0 - math.exp(-a * r))) * y


def simulate_duration(c1: float, c2: float, a0: float, u: float) -> float:
    """Inverse-cdf draw: the s solving c1 s + (c2/a0)(1 - e^{-a0 s}) = -ln u."""
    if not 0.0 < u < 1.0:
        raise InvalidUniform(f"uniform draw {u} outside (0, 1)")
    return duration_root(c1, c2, a0, -math.log(u))


def _interval_arrays(jump_times, a):
    jumps = np.asarray(jump_times, dtype=float)
    r = np.diff(jumps, prepend=0.0)
    z = hawkes_z(np.ascontiguousarray(jumps), a)
    decayed = np.exp(-a * r)
    exc_at_jump = z[:-1] * decayed         # = z[1:] - 1
    return r, z, exc_at_jump


def hawkes_loglik_ca(c: float, a: float, g_values, jump_times,
                     horizon: float | None = None,
                     g_tail: float | None = None) -> float:
    """Log-likelihood in (c, a) given the log-covariate values g_i that are
    in force on each interval (T_{i-1}, T_i].

    sum_i [ln(c + Z_{i-1} e^{-a R_i}) + g_i] minus the compensator. When a
    horizon beyond the last jump is given, the tail interval enters the
    compensator with value g_tail.
    """
    g = np.asarray(g_values, dtype=float)
    jumps = np.asarray(jump_times, dtype=float)
    r, z, exc = _interval_arrays(jumps, a)
    y = np.exp(g)
    jump_part = float(np.sum(np.log(c + exc) + g))
    comp = float(np.sum((c * r + (z[:-1] / a) * (1.0 - np.exp(-a * r))) * y))
    if horizon is not None and len(jumps) and horizon > jumps[-1]:
        if g_tail is None:
            raise ValueError("tail interval needs its g value")
        r_tail = horizon - jumps[-1]
        comp += compensator_increment(c, a, z[-1], r_tail, math.exp(g_tail))
    return jump_part - comp


def fit_ca(g_values, jump_times, init=(2.0, 1.5), horizon=None,
           g_tail=None, max_evals: int = 500) -> HawkesParams:
    """Maximize the (c, a) likelihood by Nelder-Mead in log parameters."""

    def neg(u):
        val = hawkes_loglik_ca(math.exp(u[0]), math.exp(u[1]), g_values,
                               jump_times, horizon, g_tail)
        return -val if np.isfinite(val) else 1e300

    res = minimize(
        neg, np.log(np.asarray(init, dtype=float)), method="Nelder-Mead",
        options={"maxfev": max_evals, "xatol": 1e-8, "fatol": 1e-8},
    )
    return HawkesParams(float(math.exp(res.x[0])), float(math.exp(res.x[1])))


def delta_weights(timeline: EventTimeline, c: float, a: float) -> np.ndarray:
    """Per-segment integral of the excitation part c + Z e^{-a (t - T_prev)}.

    These replace plain durations in the likelihood state, turning the
    covariate fit given (c, a) into a standard Frank-Wolfe problem.
    """
    segs = timeline.segments
    jumps = timeline.jump_times
    z = hawkes_z(np.ascontiguousarray(jumps, dtype=float), a)
    idx = np.searchsorted(jumps, segs.starts, side="right")
    t_prev = np.where(idx > 0, jumps[np.maximum(idx - 1, 0)], 0.0)
    z_prev = z[idx]
    lo = segs.starts - t_prev
    hi = lo + segs.dts
    return c * segs.dts + (z_prev / a) * (np.exp(-a * lo) - np.exp(-a * hi))


def interval_compensators(timeline: EventTimeline, params: HawkesParams,
                          g_segment_values) -> np.ndarray:
    """Compensator increment over each inter-jump interval (T_{i-1}, T_i]
    given per-segment g values; segments beyond the last jump are dropped."""
    segs = timeline.segments
    jumps = timeline.jump_times
    dw = delta_weights(timeline, params.c, params.a)
    contrib = dw * np.exp(np.asarray(g_segment_values, dtype=float))
    interval = np.searchsorted(jumps, segs.starts, side="right")
    out = np.zeros(len(jumps))
    keep = interval < len(jumps)
    np.add.at(out, interval[keep], contrib[keep])
    return out


def fit_hawkes_joint(timeline: EventTimeline, dict_config: DictionaryConfig,
                     fit_config: FitConfig, init=(2.0, 1.5), cycles: int = 2):
    """Alternate the covariate fit (Frank-Wolfe with compensator-reweighted
    durations at fixed (c, a)) and the (c, a) likelihood maximization.

    Two full cycles by default. Returns (HawkesParams, AdditiveModel).
    """
    from .dictionary import compute_weights

    if timeline.n_jumps < 2:
        raise NoJumps("joint fitting requires at least two jumps")
    weights = compute_weights(dict_config, timeline)
    base_state = build_state(timeline)
    jmask = base_state.is_jump
    c, a = float(init[0]), float(init[1])
    model = None
    jumps = timeline.jump_times
    has_tail = timeline.horizon > jumps[-1]
    horizon = timeline.horizon if has_tail else None
    g_jumps = g_tail = None
    for _ in range(cycles):
        dw = delta_weights(timeline, c, a)
        state = LikelihoodState(base_state.points, jmask, dw, timeline.horizon)
        model, _ = fit_on_state(state, dict_config, fit_config, weights)
        values = model.values_on(base_state.points)
        g_jumps = values[jmask]
        g_tail = float(values[~jmask][-1]) if has_tail else None
        params = fit_ca(g_jumps, jumps, init=(c, a), horizon=horizon,
                        g_tail=g_tail)
        c, a = params.c, params.a
    final_ll = hawkes_loglik_ca(c, a, g_jumps, jumps, horizon=horizon,
                                g_tail=g_tail)
    if not np.isfinite(final_ll):
        raise NonFiniteLikelihood("joint fit produced a non-finite likelihood")
    return HawkesParams(c, a), model
