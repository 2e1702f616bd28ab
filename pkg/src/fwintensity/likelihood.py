"""Exact sample log-likelihood, directional derivatives, and the signed
sample representation consumed by the selection oracles.

With a piecewise-constant covariate path the intensity is constant on
each segment, so all time integrals are finite sums and every quantity
here is exact (no quadrature).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backend import loglik as _loglik_kernel
from .dictionary import EvalPoints, atom_to_json, atom_from_json, atom_values, eval_atom
from .errors import NumericOverflow
from .timeline import EventTimeline

EXP_GUARD = 700.0
COEF_FLOOR = 1e-12


@dataclass(frozen=True)
class AdditiveModel:
    """Sparse additive log-intensity: offset + sum_theta b_theta * theta.

    `weights` (aligned with `terms`) are the dictionary weights used for
    the budget bookkeeping; models loaded from JSON may not carry them.
    """

    offset: float
    terms: tuple            # ((atom, coef), ...)
    budget: float | None = None
    weight_scheme: str = "unit"
    weights: tuple | None = None

    @classmethod
    def build(cls, offset, coeffs, budget=None, weight_scheme="unit",
              weight_of=None):
        """Merge duplicate atoms, drop negligible coefficients, and check
        the weighted-l1 budget when weights are available."""
        merged = {}
        for atom, coef in coeffs.items() if isinstance(coeffs, dict) else coeffs:
            merged[atom] = merged.get(atom, 0.0) + float(coef)
        items = sorted(
            ((a, c) for a, c in merged.items() if abs(c) >= COEF_FLOOR),
            key=lambda ac: ac[0].sort_key(),
        )
        ws = None
        if weight_of is not None:
            ws = tuple(weight_of(a) for a, _ in items)
            if budget is not None:
                mass = sum(w * abs(c) for w, (_, c) in zip(ws, items))
                if mass > budget + 1e-9:
                    raise ValueError(
                        f"weighted l1 mass {mass} exceeds budget {budget}"
                    )
        return cls(float(offset), tuple(items), budget, weight_scheme, ws)

    @property
    def n_terms(self) -> int:
        return len(self.terms)

    def values_on(self, points: EvalPoints) -> np.ndarray:
        """Model values at each point (offset included)."""
        out = np.full(len(points), self.offset)
        for atom, coef in self.terms:
            out += coef * atom_values(
                atom, points.X, times=points.times,
                jump_times=points.jump_times, njumps=points.njumps,
            )
        return out

    def predict(self, x, aux=None) -> float:
        f = self.offset
        for atom, coef in self.terms:
            f += coef * eval_atom(atom, x, aux)
        return f

    def l1_mass(self) -> float | None:
        if self.weights is None:
            return None
        return float(sum(w * abs(c) for w, (_, c) in zip(self.weights, self.terms)))

    def to_dict(self) -> dict:
        return {
            "f0": float(self.offset),
            "budget": None if self.budget is None else float(self.budget),
            "weights_scheme": self.weight_scheme,
            "atoms": [atom_to_json(a, c) for a, c in self.terms],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AdditiveModel":
        terms = tuple(
            (atom_from_json(rec), float(rec["coef"])) for rec in d["atoms"]
        )
        return cls(float(d["f0"]), terms, d.get("budget"),
                   d.get("weights_scheme", "unit"))


@dataclass(frozen=True)
class SignedSample:
    """Weighted point set with sum_i w_i * theta(x_i) = D_T(F, theta).

    Weight +1 at each jump point and -exp(F) * dt on each constant
    segment; points are merged in time order.
    """

    points: EvalPoints
    weights: np.ndarray

    def derivative(self, atom) -> float:
        theta = atom_values(
            atom, self.points.X, times=self.points.times,
            jump_times=self.points.jump_times, njumps=self.points.njumps,
        )
        return float(np.dot(theta, self.weights))


@dataclass(frozen=True)
class LikelihoodState:
    """Merged jump/segment evaluation points for one timeline.

    `seg_w` holds the integration weight of each segment (plain duration
    for the Cox likelihood; compensator-reweighted durations for the
    self-exciting variant). `is_jump` marks jump points in merged order.
    """

    points: EvalPoints
    is_jump: np.ndarray
    seg_w: np.ndarray
    horizon: float

    @property
    def n_jumps(self) -> int:
        return int(np.sum(self.is_jump))

    def signed_weights(self, values: np.ndarray) -> np.ndarray:
        """+1 at jumps, -exp(F)*w on segments, for model values F."""
        w = np.empty(len(values))
        w[self.is_jump] = 1.0
        w[~self.is_jump] = -np.exp(values[~self.is_jump]) * self.seg_w
        return w


def build_state(timeline: EventTimeline, seg_w=None) -> LikelihoodState:
    """Merge jump and segment-start points in predictable time order."""
    segs = timeline.segments
    jumps = timeline.jump_times
    j_njumps = np.searchsorted(jumps, jumps, side="left")
    s_njumps = np.searchsorted(jumps, segs.starts, side="right")
    times = np.concatenate([jumps, segs.starts])
    njumps = np.concatenate([j_njumps, s_njumps])
    X = np.concatenate([timeline.jump_covariates(), segs.values])
    is_jump = np.concatenate(
        [np.ones(len(jumps), bool), np.zeros(len(segs), bool)]
    )
    order = np.lexsort((njumps, times))
    points = EvalPoints(
        np.ascontiguousarray(X[order]),
        np.ascontiguousarray(times[order]),
        np.ascontiguousarray(njumps[order], dtype=np.int64),
        np.ascontiguousarray(jumps, dtype=float),
    )
    if seg_w is None:
        seg_w = segs.dts
    return LikelihoodState(points, is_jump[order],
                           np.ascontiguousarray(seg_w, dtype=float),
                           timeline.horizon)


def _check_guard(values: np.ndarray) -> None:
    if len(values) and float(np.max(values)) > EXP_GUARD:
        raise NumericOverflow(
            f"log-intensity exceeded {EXP_GUARD}; runaway budget?"
        )


def loglik_from_values(state: LikelihoodState, values: np.ndarray) -> float:
    _check_guard(values)
    fj = np.ascontiguousarray(values[state.is_jump])
    fs = np.ascontiguousarray(values[~state.is_jump])
    return _loglik_kernel(fj, fs, state.seg_w)


def log_likelihood(model: AdditiveModel, timeline: EventTimeline) -> float:
    """sum_jumps F(X(T_i)) - sum_segments exp(F) * dt, exact."""
    state = build_state(timeline)
    return loglik_from_values(state, model.values_on(state.points))


def signed_sample(model: AdditiveModel, timeline: EventTimeline) -> SignedSample:
    """The weighted point set representing the derivative D_T(F, .)."""
    state = build_state(timeline)
    values = model.values_on(state.points)
    _check_guard(values)
    return SignedSample(state.points, state.signed_weights(values))


def directional_derivative(model: AdditiveModel, timeline: EventTimeline,
                           atom) -> float:
    """D_T(F, theta) = int theta dN - int theta exp(F) dt."""
    return signed_sample(model, timeline).derivative(atom)


def predict_intensity(model: AdditiveModel, x, aux=None) -> float:
    """exp(F(x)) > 0."""
    return float(np.exp(model.predict(x, aux)))
