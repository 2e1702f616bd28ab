"""Atom families, their evaluation, weights, and selection oracles.

An atom is a bounded basis function of one covariate coordinate (plus the
self-exciting feature, which reads the jump history). The selection
oracle returns the atom maximizing the weighted absolute directional
derivative |sum_i w_i * theta(x_i)| / w_theta over all enabled families:
finite families by exhaustive scan, Bernstein by an exact linear program,
sigmoid atoms by grid search with golden refinement, and the
self-exciting decay by a refined 1-D grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backend import disc_counts
from .errors import EmptyDictionary, MissingHawkesState

FAMILY_ORDER = {
    "intercept": 0,
    "linear": 1,
    "monomial": 2,
    "trig": 3,
    "sigmoid": 4,
    "bernstein": 5,
    "hawkes": 6,
}

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Intercept:
    family = "intercept"

    def sort_key(self):
        return (0, -1)

    def params(self):
        return {}


@dataclass(frozen=True)
class Linear:
    k: int
    family = "linear"

    def sort_key(self):
        return (1, self.k)

    def params(self):
        return {"k": self.k}


@dataclass(frozen=True)
class Monomial:
    k: int
    p: int
    family = "monomial"

    def sort_key(self):
        return (2, self.k, self.p)

    def params(self):
        return {"k": self.k, "p": self.p}


@dataclass(frozen=True)
class Trig:
    k: int
    kind: str  # "sin" or "cos"
    v: int
    family = "trig"

    def sort_key(self):
        return (3, self.k, self.v, 0 if self.kind == "sin" else 1)

    def params(self):
        return {"k": self.k, "kind": self.kind, "v": self.v}


@dataclass(frozen=True)
class Sigmoid:
    """a1*x + a2*x*phi(c1*z - c2) with logistic phi; z is the threshold
    coordinate."""

    k: int
    z: int
    a1: float
    a2: float
    c1: float
    c2: float
    family = "sigmoid"

    def sort_key(self):
        return (4, self.k, self.a1, self.a2, self.c1, self.c2)

    def params(self):
        return {
            "k": self.k, "z": self.z, "a1": self.a1, "a2": self.a2,
            "c1": self.c1, "c2": self.c2,
        }


@dataclass(frozen=True)
class Bernstein:
    """Monotone polynomial sum_v a_v C(V,v) y^v (1-y)^(V-v) on y = (x+1)/2.

    The [-1, 1] coordinate is mapped onto the polynomial's [0, 1] domain;
    monotonicity in x is preserved.
    """

    k: int
    coeffs: tuple
    family = "bernstein"

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def sort_key(self):
        return (5, self.k, self.coeffs)

    def params(self):
        return {"k": self.k, "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class HawkesFeature:
    """Exponentially discounted jump count at rate `decay`, capped at `cap`.

    The count is sampled predictably: segment points use jumps up to and
    including the segment start, jump points use strictly earlier jumps.
    """

    decay: float
    cap: float = 10.0
    family = "hawkes"

    def sort_key(self):
        return (6, -1, self.decay, self.cap)

    def params(self):
        return {"decay": self.decay, "cap": self.cap}


@dataclass(frozen=True)
class HawkesEvalState:
    """Point-level state for evaluating a HawkesFeature: the query time and
    the jump times that count toward it."""

    time: float
    past_jumps: np.ndarray


def atom_bound(atom) -> float:
    """Uniform bound on |theta(x)| over [-1, 1]^K inputs."""
    if isinstance(atom, Sigmoid):
        return abs(atom.a1) + abs(atom.a2)
    if isinstance(atom, HawkesFeature):
        return atom.cap
    return 1.0


def _bernstein_basis(y: np.ndarray, order: int) -> np.ndarray:
    """Columns C(V,v) y^v (1-y)^(V-v) for v = 0..V."""
    y = np.clip(y, 0.0, 1.0)
    cols = [
        math.comb(order, v) * y**v * (1.0 - y) ** (order - v)
        for v in range(order + 1)
    ]
    return np.stack(cols, axis=-1)


def _logistic(u):
    return 1.0 / (1.0 + np.exp(-u))


def atom_values(atom, X, times=None, jump_times=None, at_jumps=False,
                njumps=None) -> np.ndarray:
    """Evaluate an atom on rows of X (vectorized).

    HawkesFeature atoms additionally need point times and the jump-time
    array; `at_jumps` switches between the strictly-before convention for
    jump points and the inclusive convention for segment starts.
    """
    X = np.atleast_2d(X)
    if isinstance(atom, Intercept):
        return np.ones(X.shape[0])
    if isinstance(atom, Linear):
        return X[:, atom.k].copy()
    if isinstance(atom, Monomial):
        return X[:, atom.k] ** atom.p
    if isinstance(atom, Trig):
        u = _TWO_PI * atom.v * X[:, atom.k]
        return np.sin(u) if atom.kind == "sin" else np.cos(u)
    if isinstance(atom, Sigmoid):
        x = X[:, atom.k]
        z = X[:, atom.z]
        return atom.a1 * x + atom.a2 * x * _logistic(atom.c1 * z - atom.c2)
    if isinstance(atom, Bernstein):
        basis = _bernstein_basis((X[:, atom.k] + 1.0) / 2.0, atom.order)
        return basis @ np.asarray(atom.coeffs)
    if isinstance(atom, HawkesFeature):
        if times is None or jump_times is None:
            raise MissingHawkesState(
                "HawkesFeature evaluation needs point times and jump times"
            )
        times = np.ascontiguousarray(times, dtype=float)
        jump_times = np.ascontiguousarray(jump_times, dtype=float)
        if njumps is None:
            side = "left" if at_jumps else "right"
            njumps = np.searchsorted(jump_times, times, side=side)
        njumps = np.ascontiguousarray(njumps, dtype=np.int64)
        s = disc_counts(times, njumps, jump_times, atom.decay)
        return np.minimum(s, atom.cap)
    raise TypeError(f"unknown atom type {type(atom)!r}")


def eval_atom(atom, x, aux_hawkes_state=None) -> float:
    """Evaluate a single atom at one covariate vector."""
    if isinstance(atom, HawkesFeature):
        if aux_hawkes_state is None:
            raise MissingHawkesState("HawkesFeature needs its evaluation state")
        past = np.asarray(aux_hawkes_state.past_jumps, dtype=float)
        s = float(np.sum(np.exp(-atom.decay * (aux_hawkes_state.time - past))))
        return min(s, atom.cap)
    return float(atom_values(atom, np.atleast_2d(np.asarray(x, float)))[0])


def atom_to_json(atom, coef: float) -> dict:
    return {"family": atom.family, "params": atom.params(), "coef": float(coef)}


def atom_from_json(d: dict):
    family = d["family"]
    p = d["params"]
    if family == "intercept":
        return Intercept()
    if family == "linear":
        return Linear(int(p["k"]))
    if family == "monomial":
        return Monomial(int(p["k"]), int(p["p"]))
    if family == "trig":
        return Trig(int(p["k"]), str(p["kind"]), int(p["v"]))
    if family == "sigmoid":
        return Sigmoid(int(p["k"]), int(p["z"]), float(p["a1"]),
                       float(p["a2"]), float(p["c1"]), float(p["c2"]))
    if family == "bernstein":
        return Bernstein(int(p["k"]), tuple(float(c) for c in p["coeffs"]))
    if family == "hawkes":
        return HawkesFeature(float(p["decay"]), float(p["cap"]))
    raise ValueError(f"unknown atom family {family!r}")


@dataclass(frozen=True)
class DictionaryConfig:
    """Which families are enabled and how atoms are weighted."""

    families: tuple = ("intercept", "linear")
    weight_scheme: str = "empirical_l2"  # or "unit"
    weight_floor: float = 1e-6
    monomial_powers: tuple = (1, 2, 3)
    trig_max_freq: int = 2
    bernstein_order: int = 4
    bernstein_lipschitz: float = 2.0
    sigmoid_grid: int = 21
    threshold_index: int = 0
    hawkes_decay_range: tuple = (0.1, 10.0)
    hawkes_grid: int = 25
    hawkes_cap: float = 10.0
    coordinates: tuple | None = None
    families_by_coordinate: tuple | None = None  # ((k, (families...)), ...)

    def coordinate_families(self, k: int) -> tuple:
        if self.families_by_coordinate is not None:
            for kk, fams in self.families_by_coordinate:
                if kk == k:
                    return fams
        return self.families

    def enabled_coordinates(self, dim: int):
        if self.coordinates is not None:
            return [k for k in self.coordinates if k < dim]
        return list(range(dim))


def enumerate_finite_atoms(config: DictionaryConfig, dim: int) -> list:
    """All finite-family atoms in canonical (tie-break) order."""
    atoms = []
    coords = config.enabled_coordinates(dim)
    if "intercept" in config.families:
        atoms.append(Intercept())
    for k in coords:
        if "linear" in config.coordinate_families(k):
            atoms.append(Linear(k))
    for k in coords:
        fams = config.coordinate_families(k)
        if "monomial" in fams:
            for p in config.monomial_powers:
                atoms.append(Monomial(k, p))
    for k in coords:
        fams = config.coordinate_families(k)
        if "trig" in fams:
            for v in range(1, config.trig_max_freq + 1):
                atoms.append(Trig(k, "sin", v))
                atoms.append(Trig(k, "cos", v))
    return atoms


@dataclass(frozen=True)
class DictionaryWeights:
    """Per-atom weights for the finite families (parametric atoms use unit
    weights); zero-norm atoms are excluded."""

    atoms: tuple
    values: np.ndarray
    excluded: tuple = field(default_factory=tuple)

    def weight_of(self, atom) -> float:
        for a, w in zip(self.atoms, self.values):
            if a == atom:
                return float(w)
        return 1.0


def compute_weights(config: DictionaryConfig, timeline) -> DictionaryWeights:
    """Empirical L2 (or unit) weights over the finite atoms of a timeline."""
    atoms = enumerate_finite_atoms(config, timeline.dim)
    if config.weight_scheme == "unit":
        return DictionaryWeights(tuple(atoms), np.ones(len(atoms)))
    segs = timeline.segments
    kept, ws, excluded = [], [], []
    for atom in atoms:
        theta = atom_values(atom, segs.values)
        mean_sq = float(np.dot(theta * theta, segs.dts)) / timeline.horizon
        if mean_sq == 0.0:
            excluded.append(atom)
            continue
        kept.append(atom)
        ws.append(max(math.sqrt(mean_sq), config.weight_floor))
    return DictionaryWeights(tuple(kept), np.asarray(ws), tuple(excluded))


def bernstein_lp_oracle(d, alpha: float, order: int, sign: int):
    """Maximize sign * sum_v a_v d_v subject to the monotone-Lipschitz
    chain 0 <= a_{v-1} <= a_v <= 1 and a_v - a_{v-1} <= alpha/order.

    In increments delta_v = a_v - a_{v-1} (delta_0 = a_0) the problem is a
    fractional knapsack with one coupling constraint sum delta <= 1 and is
    solved exactly by a greedy fill in decreasing order of the objective
    suffix sums. Returns the coefficient vector a.
    """
    d = np.asarray(d, dtype=float)
    c = np.cumsum((sign * d)[::-1])[::-1]  # c_u = sign * sum_{v>=u} d_v
    boxes = np.full(order + 1, alpha / order)
    boxes[0] = 1.0
    delta = np.zeros(order + 1)
    remaining = 1.0
    for u in sorted(range(order + 1), key=lambda i: (-c[i], i)):
        if c[u] <= 0.0 or remaining <= 0.0:
            break
        delta[u] = min(boxes[u], remaining)
        remaining -= delta[u]
    return np.cumsum(delta)


def _golden_max_1d(fun, lo: float, hi: float, tol: float = 1e-6):
    """Deterministic golden-section maximizer on [lo, hi]."""
    invphi = 0.6180339887498949
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


@dataclass(frozen=True)
class EvalPoints:
    """The point set over which directional derivatives are summed."""

    X: np.ndarray          # (m, K) covariates
    times: np.ndarray      # (m,) point times
    njumps: np.ndarray     # (m,) jumps counting toward each point
    jump_times: np.ndarray

    def __len__(self):
        return len(self.times)


class CandidateSet:
    """Cached atom-value matrices and oracles for one point set.

    Selection over different weight vectors (one per Frank-Wolfe
    iteration) then costs a single matrix-vector product for the finite
    families plus the parametric oracles.
    """

    def __init__(self, config: DictionaryConfig, points: EvalPoints,
                 weights: DictionaryWeights):
        self.config = config
        self.points = points
        self.finite_atoms = list(weights.atoms)
        self.finite_weights = np.asarray(weights.values, dtype=float)
        if self.finite_atoms:
            self.V = np.column_stack(
                [atom_values(a, points.X) for a in self.finite_atoms]
            )
        else:
            self.V = np.zeros((len(points), 0))
        self._bernstein_basis_cache = {}
        dim = points.X.shape[1]
        coords = config.enabled_coordinates(dim)
        self.sigmoid_coords = [
            k for k in coords if "sigmoid" in config.coordinate_families(k)
        ]
        self.bernstein_coords = [
            k for k in coords if "bernstein" in config.coordinate_families(k)
        ]
        self.use_hawkes = "hawkes" in config.families

    def _bernstein_Q(self, k: int) -> np.ndarray:
        if k not in self._bernstein_basis_cache:
            y = (self.points.X[:, k] + 1.0) / 2.0
            self._bernstein_basis_cache[k] = _bernstein_basis(
                y, self.config.bernstein_order
            )
        return self._bernstein_basis_cache[k]

    def finite_derivatives(self, w: np.ndarray) -> np.ndarray:
        return self.V.T @ w

    def _best_bernstein(self, k: int, w: np.ndarray):
        cfg = self.config
        d = self._bernstein_Q(k).T @ w
        best = None
        for sign in (1, -1):
            a = bernstein_lp_oracle(d, cfg.bernstein_lipschitz,
                                    cfg.bernstein_order, sign)
            obj = float(a @ d)
            if best is None or abs(obj) > abs(best[1]):
                best = (a, obj)
        a, obj = best
        atom = Bernstein(k, tuple(float(v) for v in a))
        return atom, obj, 1.0

    def _best_sigmoid(self, k: int, w: np.ndarray):
        cfg = self.config
        x = self.points.X[:, k]
        z = self.points.X[:, cfg.threshold_index]
        wx = w * x
        dx = float(np.sum(wx))

        def dphi(c1, c2):
            return float(wx @ _logistic(c1 * z - c2))

        grid = np.linspace(-1.0, 1.0, cfg.sigmoid_grid)
        vals = np.abs(
            np.einsum(
                "i,ijk->jk", wx,
                _logistic(grid[None, :, None] * z[:, None, None]
                          - grid[None, None, :]),
            )
        )
        j, l = np.unravel_index(int(np.argmax(vals)), vals.shape)
        c1, c2 = float(grid[j]), float(grid[l])
        h = float(grid[1] - grid[0])
        c1, _ = _golden_max_1d(
            lambda u: abs(dphi(u, c2)), max(-1.0, c1 - h), min(1.0, c1 + h)
        )
        c2, _ = _golden_max_1d(
            lambda u: abs(dphi(c1, u)), max(-1.0, c2 - h), min(1.0, c2 + h)
        )
        dxp = dphi(c1, c2)
        a1 = 1.0 if dx >= 0 else -1.0
        a2 = 1.0 if dxp >= 0 else -1.0
        atom = Sigmoid(k, cfg.threshold_index, a1, a2, c1, c2)
        return atom, a1 * dx + a2 * dxp, 1.0

    def _best_hawkes(self, w: np.ndarray):
        cfg = self.config
        lo, hi = cfg.hawkes_decay_range
        pts = self.points

        def deriv(a):
            s = disc_counts(pts.times, pts.njumps, pts.jump_times, a)
            return float(np.dot(np.minimum(s, cfg.hawkes_cap), w))

        grid = np.geomspace(lo, hi, cfg.hawkes_grid)
        ds = np.array([deriv(a) for a in grid])
        i = int(np.argmax(np.abs(ds)))
        a_lo = grid[max(i - 1, 0)]
        a_hi = grid[min(i + 1, len(grid) - 1)]
        a_best, _ = _golden_max_1d(
            lambda a: abs(deriv(a)), a_lo, a_hi, tol=1e-6 * (hi - lo)
        )
        d_best = deriv(a_best)
        atom = HawkesFeature(float(a_best), cfg.hawkes_cap)
        return atom, d_best, 1.0

    def select(self, w: np.ndarray):
        """Atom maximizing |D| / w_theta, with deterministic tie-breaking
        by canonical order. Returns (atom, score, derivative, weight)."""
        best = None
        if self.finite_atoms:
            d = self.finite_derivatives(w)
            scores = np.abs(d) / self.finite_weights
            i = int(np.argmax(scores))
            best = (self.finite_atoms[i], float(scores[i]), float(d[i]),
                    float(self.finite_weights[i]))
        for k in self.sigmoid_coords:
            atom, deriv, wt = self._best_sigmoid(k, w)
            score = abs(deriv) / wt
            if best is None or score > best[1]:
                best = (atom, score, deriv, wt)
        for k in self.bernstein_coords:
            atom, deriv, wt = self._best_bernstein(k, w)
            score = abs(deriv) / wt
            if best is None or score > best[1]:
                best = (atom, score, deriv, wt)
        if self.use_hawkes:
            atom, deriv, wt = self._best_hawkes(w)
            score = abs(deriv) / wt
            if best is None or score > best[1]:
                best = (atom, score, deriv, wt)
        if best is None:
            raise EmptyDictionary("no candidate atoms are enabled")
        return best


def select_atom(config: DictionaryConfig, signed_sample, weights):
    """Best atom for a signed sample: argmax |sum_i w_i theta(x_i)| / w_theta.

    Returns (atom, score)."""
    cand = CandidateSet(config, signed_sample.points, weights)
    atom, score, _, _ = cand.select(signed_sample.weights)
    return atom, score
