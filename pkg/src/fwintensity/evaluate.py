"""Out-of-sample forecast comparison, time-rescaling goodness-of-fit, and
the simulation loss metric.

The forecast test compares two predictable models g, g' through the
out-of-sample log-likelihood ratio; under equal predictive ability the
ratio scaled by the jump-sum variance estimate is asymptotically standard
normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogorov, ndtr

from .errors import DegenerateDenominator, DimensionMismatch, ZeroVariance
from .hawkes import HawkesParams, interval_compensators
from .likelihood import AdditiveModel, build_state
from .timeline import EventTimeline


@dataclass(frozen=True)
class TestResult:
    """Forecast-comparison outcome: statistic = L_S / sqrt(S * sigma^2)."""

    statistic: float
    sigma_hat: float
    avg_loglr: float
    p_one_sided: float
    p_two_sided: float
    S: float

    def to_dict(self) -> dict:
        """Report row: average log-LR and its s.e., both x100."""
        return {
            "avg_loglr_x100": 100.0 * self.avg_loglr,
            "se_x100": 100.0 * self.sigma_hat / math.sqrt(self.S),
            "p_value": self.p_two_sided,
            "statistic": self.statistic,
        }


def oos_lr_test(model_g: AdditiveModel, model_gp: AdditiveModel,
                timeline: EventTimeline,
                timeline_gp: EventTimeline | None = None) -> TestResult:
    """Likelihood-ratio forecast test of g against g' on held-out data.

    Both models must have been fit on earlier data (predictability).
    `timeline_gp` allows g' to read differently preprocessed covariates on
    the same time grid.
    """
    from .likelihood import _check_guard

    state = build_state(timeline)
    va = model_g.values_on(state.points)
    if timeline_gp is None:
        vb = model_gp.values_on(state.points)
    else:
        state_b = build_state(timeline_gp)
        if not np.array_equal(state_b.points.times, state.points.times):
            raise DimensionMismatch("timelines disagree on time grid")
        vb = model_gp.values_on(state_b.points)
    _check_guard(va)
    _check_guard(vb)
    jmask = state.is_jump
    diff_j = va[jmask] - vb[jmask]
    s_horizon = timeline.horizon
    l_s = float(np.sum(diff_j)) - float(
        np.dot(np.exp(va[~jmask]) - np.exp(vb[~jmask]), state.seg_w)
    )
    sigma_sq = float(np.dot(diff_j, diff_j)) / s_horizon
    if sigma_sq == 0.0:
        raise ZeroVariance("models agree at every jump; test undefined")
    stat = l_s / math.sqrt(s_horizon * sigma_sq)
    return TestResult(
        statistic=stat,
        sigma_hat=math.sqrt(sigma_sq),
        avg_loglr=l_s / s_horizon,
        p_one_sided=float(1.0 - ndtr(stat)),
        p_two_sided=float(2.0 * (1.0 - ndtr(abs(stat)))),
        S=s_horizon,
    )


def compensator_residuals(model: AdditiveModel, timeline: EventTimeline,
                          hawkes_params: HawkesParams | None = None) -> np.ndarray:
    """Fitted compensator increment over each inter-jump interval."""
    state = build_state(timeline)
    seg_values = model.values_on(state.points)[~state.is_jump]
    if hawkes_params is not None:
        return interval_compensators(timeline, hawkes_params, seg_values)
    segs = timeline.segments
    contrib = np.exp(seg_values) * segs.dts
    jumps = timeline.jump_times
    interval = np.searchsorted(jumps, segs.starts, side="right")
    out = np.zeros(len(jumps))
    keep = interval < len(jumps)
    np.add.at(out, interval[keep], contrib[keep])
    return out


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    ks_stat: float
    p_value: float

    def to_dict(self) -> dict:
        return {"ks_stat": self.ks_stat, "p_value": self.p_value,
                "mean_residual": float(np.mean(self.residuals))}


def _ks_exponential(residuals: np.ndarray):
    """KS distance to Exp(1) with the standard asymptotic p-value."""
    r = np.sort(residuals)
    n = len(r)
    cdf = 1.0 - np.exp(-r)
    grid = np.arange(1, n + 1) / n
    d = float(max(np.max(cdf - (grid - 1.0 / n)), np.max(grid - cdf)))
    return d, float(kolmogorov(math.sqrt(n) * d))


def time_rescaling_residuals(model: AdditiveModel, timeline: EventTimeline,
                             hawkes_params: HawkesParams | None = None) -> ResidualReport:
    """Under the true model the rescaled inter-jump times are iid Exp(1)."""
    residuals = compensator_residuals(model, timeline, hawkes_params)
    ks, p = _ks_exponential(residuals)
    return ResidualReport(residuals, ks, p)


def loss_metric(model: AdditiveModel, truth_g0, timeline_oos: EventTimeline) -> float:
    """Squared error of the log-intensity at out-of-sample jumps, relative
    to the best constant with hindsight.

    `truth_g0` maps the timeline's jump covariates to true log-intensity
    values. The best-constant reference scores exactly 1.
    """
    state = build_state(timeline_oos)
    model_vals = model.values_on(state.points)[state.is_jump]
    g0_vals = np.asarray(truth_g0(timeline_oos.jump_covariates()), dtype=float)
    gamma0 = float(np.mean(g0_vals))
    denom = float(np.sum((g0_vals - gamma0) ** 2))
    if denom == 0.0:
        raise DegenerateDenominator("true log-intensity constant at jumps")
    num = float(np.sum((g0_vals - model_vals) ** 2))
    return num / denom
