"""Event/covariate data: construction, queries, preprocessing, CSV I/O.

A timeline holds the jump times of a counting process on (0, T] together
with a piecewise-constant covariate path. The path is right-constant
between updates and queried left-continuously, so the value effective AT
an update time is the previous one (predictability).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyUpdates,
    NonMonotoneTimes,
    OutOfRange,
    ZeroNormAtom,
)


@dataclass(frozen=True)
class Segments:
    """Refinement of update and jump times into constant-covariate pieces.

    Piece j covers (starts[j], starts[j] + dts[j]] and carries values[j].
    """

    starts: np.ndarray
    dts: np.ndarray
    values: np.ndarray

    def __len__(self):
        return len(self.starts)


@dataclass(frozen=True)
class EventTimeline:
    """Jump times plus a piecewise-constant covariate path on [0, T]."""

    horizon: float
    jump_times: np.ndarray
    update_times: np.ndarray
    update_values: np.ndarray

    @property
    def n_jumps(self) -> int:
        return len(self.jump_times)

    @property
    def dim(self) -> int:
        return self.update_values.shape[1]

    def covariate_at(self, t: float) -> np.ndarray:
        """Covariate value effective at time t (left-continuous query)."""
        if not 0.0 < t <= self.horizon:
            raise OutOfRange(f"query time {t} outside (0, {self.horizon}]")
        idx = np.searchsorted(self.update_times, t, side="left") - 1
        return self.update_values[idx]

    def covariates_at(self, times: np.ndarray) -> np.ndarray:
        """Vectorized left-continuous covariate lookup."""
        idx = np.searchsorted(self.update_times, times, side="left") - 1
        if np.any(idx < 0):
            raise OutOfRange("query times must be positive")
        return self.update_values[idx]

    @cached_property
    def segments(self) -> Segments:
        """Constant-covariate pieces refined by update and jump times."""
        cuts = np.unique(
            np.concatenate(
                [[0.0], self.update_times, self.jump_times, [self.horizon]]
            )
        )
        cuts = cuts[cuts <= self.horizon]
        starts = cuts[:-1]
        dts = np.diff(cuts)
        idx = np.searchsorted(self.update_times, starts, side="right") - 1
        return Segments(starts, dts, self.update_values[idx])

    def jump_covariates(self) -> np.ndarray:
        """Covariates effective at each jump (left-continuous)."""
        return self.covariates_at(self.jump_times)

    def replace_values(self, values: np.ndarray) -> "EventTimeline":
        return EventTimeline(
            self.horizon, self.jump_times, self.update_times, np.asarray(values, float)
        )


def build_timeline(updates, jumps, horizon) -> EventTimeline:
    """Validate and assemble an EventTimeline.

    `updates` is a sequence of (time, covariate-vector) pairs; the first
    update must be at time 0 (times <= 0 are clamped to 0). Jumps must lie
    strictly inside (0, horizon].
    """
    horizon = float(horizon)
    if horizon <= 0:
        raise OutOfRange("horizon must be positive")
    updates = list(updates)
    if not updates:
        raise EmptyUpdates("at least one covariate update is required")
    u_times = np.asarray([float(t) for t, _ in updates])
    u_times = np.where(u_times <= 0.0, 0.0, u_times)
    vals = [np.atleast_1d(np.asarray(v, dtype=float)) for _, v in updates]
    dim = len(vals[0])
    for v in vals:
        if v.shape != (dim,):
            raise DimensionMismatch(
                f"covariate vectors must all have length {dim}"
            )
    order = np.argsort(u_times, kind="stable")
    u_times = u_times[order]
    u_values = np.asarray(vals)[order]
    if len(u_times) > 1 and np.any(np.diff(u_times) <= 0):
        raise NonMonotoneTimes("update times must be strictly increasing")
    if u_times[0] != 0.0:
        raise OutOfRange("the first covariate update must be at time 0")
    if u_times[-1] > horizon:
        raise OutOfRange("update times beyond the horizon are not allowed")

    j_arr = np.sort(np.asarray(list(jumps), dtype=float))
    if len(j_arr) > 1 and np.any(np.diff(j_arr) <= 0):
        raise NonMonotoneTimes("jump times must be strictly increasing")
    if len(j_arr) and (j_arr[0] <= 0.0 or j_arr[-1] > horizon):
        raise OutOfRange(f"jump times must lie in (0, {horizon}]")

    u_values = np.ascontiguousarray(u_values, dtype=float)
    for a in (j_arr, u_times, u_values):
        a.setflags(write=False)
    return EventTimeline(horizon, j_arr, u_times, u_values)


def covariate_at(timeline: EventTimeline, t: float) -> np.ndarray:
    return timeline.covariate_at(t)


@dataclass(frozen=True)
class PreprocessTransform:
    """Per-coordinate winsorization caps and scales mapping into [-1, 1]."""

    caps: np.ndarray
    scales: np.ndarray
    degenerate: tuple = field(default_factory=tuple)

    def apply_values(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, -self.caps, self.caps) / self.scales

    def apply(self, timeline: EventTimeline) -> EventTimeline:
        return timeline.replace_values(self.apply_values(timeline.update_values))

    def to_dict(self) -> dict:
        # infinite caps (identity transform) are stored as nulls to keep
        # the JSON strict
        return {
            "caps": [float(c) if np.isfinite(c) else None for c in self.caps],
            "scales": [float(s) for s in self.scales],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PreprocessTransform":
        caps = np.asarray(
            [np.inf if c is None else float(c) for c in d["caps"]]
        )
        return cls(caps, np.asarray(d["scales"], float))

    @classmethod
    def identity(cls, dim: int) -> "PreprocessTransform":
        return cls(np.full(dim, np.inf), np.ones(dim))

    @classmethod
    def fixed(cls, dim: int, cap: float) -> "PreprocessTransform":
        return cls(np.full(dim, float(cap)), np.full(dim, float(cap)))


def _time_weighted_abs_quantile(values: np.ndarray, weights: np.ndarray, q: float) -> float:
    """Smallest |v| whose cumulative time weight reaches q of the total."""
    a = np.abs(values)
    order = np.argsort(a, kind="stable")
    a = a[order]
    w = weights[order]
    cw = np.cumsum(w)
    total = cw[-1]
    idx = np.searchsorted(cw, q * total - 1e-12 * total, side="left")
    return float(a[min(idx, len(a) - 1)])


def winsorize_standardize(timeline: EventTimeline, q: float = 0.95):
    """Clip each coordinate at its time-weighted q-quantile of |value| and
    divide by that quantile, mapping the path into [-1, 1]^K.

    Returns the transformed timeline and the transform, so held-out data
    can be mapped with the training caps. Coordinates with quantile 0 are
    left unscaled and flagged in the transform.
    """
    if timeline.n_jumps == 0 and len(timeline.update_times) == 0:
        raise EmptyUpdates("cannot winsorize an empty timeline")
    edges = np.append(timeline.update_times, timeline.horizon)
    durations = np.diff(edges)
    keep = durations > 0
    vals = timeline.update_values[keep]
    durs = durations[keep]
    dim = timeline.dim
    caps = np.empty(dim)
    degenerate = []
    for k in range(dim):
        caps[k] = _time_weighted_abs_quantile(vals[:, k], durs, q)
        if caps[k] == 0.0:
            degenerate.append(k)
            caps[k] = 1.0
    transform = PreprocessTransform(caps, caps.copy(), tuple(degenerate))
    return transform.apply(timeline), transform


def empirical_l2_weight(timeline: EventTimeline, atom) -> float:
    """sqrt of the time-average of atom(X(t))^2, exact over segments."""
    from .dictionary import atom_values

    segs = timeline.segments
    theta = atom_values(
        atom,
        segs.values,
        times=segs.starts,
        jump_times=timeline.jump_times,
        at_jumps=False,
    )
    mean_sq = float(np.dot(theta * theta, segs.dts)) / timeline.horizon
    if mean_sq == 0.0:
        raise ZeroNormAtom(f"atom {atom} has zero empirical L2 norm")
    return float(np.sqrt(mean_sq))


def window(timeline: EventTimeline, t0: float, t1: float) -> EventTimeline:
    """Restrict to (t0, t1], shifting times so the window starts at 0."""
    if not 0.0 <= t0 < t1 <= timeline.horizon:
        raise OutOfRange(f"window ({t0}, {t1}] outside [0, {timeline.horizon}]")
    jmask = (timeline.jump_times > t0) & (timeline.jump_times <= t1)
    jumps = timeline.jump_times[jmask] - t0
    base_idx = np.searchsorted(timeline.update_times, t0, side="right") - 1
    umask = (timeline.update_times > t0) & (timeline.update_times < t1)
    u_times = np.concatenate([[0.0], timeline.update_times[umask] - t0])
    u_values = np.concatenate(
        [timeline.update_values[base_idx][None, :], timeline.update_values[umask]]
    )
    return build_timeline(list(zip(u_times, u_values)), jumps, t1 - t0)


def concat(first: EventTimeline, second: EventTimeline) -> EventTimeline:
    """Append `second` after `first` (times shifted by first.horizon).

    The second timeline's time-0 update takes effect just after the join,
    overriding any first-timeline update sitting exactly at its horizon.
    """
    if first.dim != second.dim:
        raise DimensionMismatch("timelines disagree on covariate dimension")
    t_shift = first.horizon
    keep = first.update_times < t_shift
    u_times = np.concatenate(
        [first.update_times[keep], second.update_times + t_shift]
    )
    u_values = np.concatenate(
        [first.update_values[keep], second.update_values]
    )
    jumps = np.concatenate([first.jump_times, second.jump_times + t_shift])
    return build_timeline(
        list(zip(u_times, u_values)), jumps, t_shift + second.horizon
    )


def write_events_csv(path, jump_times) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time"])
        for t in jump_times:
            w.writerow([repr(float(t))])


def write_covariates_csv(path, update_times, update_values) -> None:
    dim = np.asarray(update_values).shape[1]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time"] + [f"x{k + 1}" for k in range(dim)])
        for t, row in zip(update_times, update_values):
            w.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def read_timeline(events_path, covariates_path, horizon=None) -> EventTimeline:
    """Assemble a timeline from the events and covariates CSV files.

    Without an explicit horizon, the last observed time is used.
    """
    jumps = []
    with open(events_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "time" not in reader.fieldnames:
            raise OutOfRange("events CSV must have a 'time' header")
        for row in reader:
            jumps.append(float(row["time"]))
    updates = []
    with open(covariates_path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "time":
            raise OutOfRange("covariates CSV must start with a 'time' column")
        for row in reader:
            updates.append((float(row[0]), [float(v) for v in row[1:]]))
    if horizon is None:
        horizon = max(
            jumps[-1] if jumps else 0.0,
            updates[-1][0] if updates else 0.0,
        )
    return build_timeline(updates, jumps, horizon)
