
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwintensity.dictionary import (
    Bernstein,
    DictionaryConfig,
    DictionaryWeights,
    EvalPoints,
    HawkesEvalState,
    HawkesFeature,
    Intercept,
    Linear,
    Monomial,
    Sigmoid,
    Trig,
    atom_bound,
    atom_from_json,
    atom_to_json,
    atom_values,
    bernstein_lp_oracle,
    compute_weights,
    enumerate_finite_atoms,
    eval_atom,
    select_atom,
)
from fwintensity.errors import EmptyDictionary, MissingHawkesState
from fwintensity.likelihood import SignedSample
from fwintensity.timeline import build_timeline


def make_points(rng, m=30, dim=3):
    X = rng.uniform(-1, 1, (m, dim))
    times = np.sort(rng.uniform(0, 10, m))
    jumps = np.sort(rng.uniform(0, 10, 6))
    njumps = np.searchsorted(jumps, times, side="right")
    return EvalPoints(X, times, njumps.astype(np.int64), jumps)


class TestEval:
    def test_linear(self):
        assert eval_atom(Linear(1), [0.1, -0.7]) == pytest.approx(-0.7)

    def test_monomial(self):
        assert eval_atom(Monomial(0, 3), [0.5]) == pytest.approx(0.125)

    def test_intercept(self):
        assert eval_atom(Intercept(), [0.3, 0.4]) == 1.0

    def test_sigmoid_reduces_to_linear(self):
        atom = Sigmoid(k=0, z=1, a1=1.0, a2=0.0, c1=0.5, c2=0.1)
        assert eval_atom(atom, [0.3, 0.9]) == pytest.approx(0.3)

    def test_sigmoid_full(self):
        atom = Sigmoid(k=0, z=1, a1=0.5, a2=1.0, c1=0.8, c2=-0.2)
        x, z = 0.4, -0.6
        phi = 1.0 / (1.0 + np.exp(-(0.8 * z + 0.2)))
        assert eval_atom(atom, [x, z]) == pytest.approx(0.5 * x + x * phi)

    def test_trig_period_one(self):
        atom = Trig(0, "sin", 2)
        assert eval_atom(atom, [0.25]) == pytest.approx(np.sin(np.pi))
        assert eval_atom(Trig(0, "cos", 1), [0.5]) == pytest.approx(-1.0)

    def test_bernstein_maps_to_unit_interval(self):
        atom = Bernstein(0, (0.0, 1.0))  # order 1: theta(y) = y
        assert eval_atom(atom, [0.0]) == pytest.approx(0.5)
        assert eval_atom(atom, [1.0]) == pytest.approx(1.0)
        assert eval_atom(atom, [-1.0]) == pytest.approx(0.0)

    def test_hawkes_feature_eval(self):
        atom = HawkesFeature(decay=1.0, cap=10.0)
        state = HawkesEvalState(3.0, np.array([1.0, 2.0]))
        expected = np.exp(-2.0) + np.exp(-1.0)
        assert eval_atom(atom, [0.0], state) == pytest.approx(expected)

    def test_hawkes_feature_needs_state(self):
        with pytest.raises(MissingHawkesState):
            eval_atom(HawkesFeature(decay=1.0), [0.0])
        with pytest.raises(MissingHawkesState):
            atom_values(HawkesFeature(decay=1.0), np.zeros((3, 1)))

    def test_hawkes_cap_binds(self):
        atom = HawkesFeature(decay=1.0, cap=0.5)
        state = HawkesEvalState(1.0, np.array([0.9, 0.95]))
        assert eval_atom(atom, [0.0], state) == 0.5

    @given(st.integers(0, 6), st.data())
    @settings(max_examples=40, deadline=None)
    def test_bounds(self, idx, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 10**6)))
        atoms = [
            Intercept(), Linear(0), Monomial(0, 3), Trig(0, "cos", 3),
            Sigmoid(0, 1, -1.0, 1.0, 0.7, -0.3),
            Bernstein(0, (0.1, 0.5, 1.0)),
            HawkesFeature(decay=0.5, cap=2.0),
        ]
        atom = atoms[idx]
        X = rng.uniform(-1, 1, (20, 2))
        times = np.sort(rng.uniform(0, 5, 20))
        jumps = np.sort(rng.uniform(0, 5, 40))
        njumps = np.searchsorted(jumps, times, side="right").astype(np.int64)
        vals = atom_values(atom, X, times=times, jump_times=jumps, njumps=njumps)
        assert np.all(np.abs(vals) <= atom_bound(atom) + 1e-12)

    def test_json_roundtrip(self):
        atoms = [
            Intercept(), Linear(3), Monomial(1, 2), Trig(0, "cos", 2),
            Sigmoid(2, 0, 1.0, -1.0, 0.25, 0.5),
            Bernstein(1, (0.0, 0.25, 0.5)), HawkesFeature(1.5, 8.0),
        ]
        for atom in atoms:
            rec = atom_to_json(atom, 0.7)
            assert atom_from_json(rec) == atom

    def test_value_comparable(self):
        assert Linear(2) == Linear(2)
        assert Monomial(1, 2) != Monomial(1, 3)


class TestSelectFinite:
    def _sample_for(self, d_values):
        """Two-point sample realizing given D values for Linear(0), Linear(1)."""
        X = np.array([[1.0, 0.0], [0.0, 1.0]])
        points = EvalPoints(X, np.array([1.0, 2.0]),
                            np.array([0, 0], dtype=np.int64), np.array([]))
        return SignedSample(points, np.asarray(d_values, dtype=float))

    def test_unit_weight_argmax(self):
        sample = self._sample_for([3.0, -5.0])
        weights = DictionaryWeights((Linear(0), Linear(1)), np.array([1.0, 1.0]))
        cfg = DictionaryConfig(families=("linear",), weight_scheme="unit")
        atom, score = select_atom(cfg, sample, weights)
        assert atom == Linear(1)
        assert score == pytest.approx(5.0)

    def test_weighted_argmax(self):
        sample = self._sample_for([3.0, -5.0])
        weights = DictionaryWeights((Linear(0), Linear(1)), np.array([1.0, 2.0]))
        cfg = DictionaryConfig(families=("linear",), weight_scheme="unit")
        atom, score = select_atom(cfg, sample, weights)
        assert atom == Linear(0)
        assert score == pytest.approx(3.0)

    def test_tie_break_canonical(self):
        sample = self._sample_for([4.0, 4.0])
        weights = DictionaryWeights((Linear(0), Linear(1)), np.ones(2))
        cfg = DictionaryConfig(families=("linear",), weight_scheme="unit")
        atom, _ = select_atom(cfg, sample, weights)
        assert atom == Linear(0)

    def test_empty_dictionary(self, rng):
        points = make_points(rng)
        sample = SignedSample(points, np.ones(len(points)))
        cfg = DictionaryConfig(families=(), weight_scheme="unit")
        weights = DictionaryWeights((), np.zeros(0))
        with pytest.raises(EmptyDictionary):
            select_atom(cfg, sample, weights)

    def test_matches_brute_force(self, rng):
        cfg = DictionaryConfig(
            families=("intercept", "linear", "monomial", "trig"),
            weight_scheme="unit", trig_max_freq=2,
        )
        for trial in range(10):
            points = make_points(rng, m=25, dim=4)
            w = rng.normal(size=25)
            atoms = enumerate_finite_atoms(cfg, 4)
            weights = DictionaryWeights(
                tuple(atoms), rng.uniform(0.5, 2.0, len(atoms))
            )
            sample = SignedSample(points, w)
            got_atom, got_score = select_atom(cfg, sample, weights)
            best = max(
                ((abs(sample.derivative(a)) / wt, -i, a)
                 for i, (a, wt) in enumerate(zip(atoms, weights.values))),
            )
            assert got_atom == best[2]
            assert got_score == pytest.approx(best[0], rel=1e-12)


def brute_force_bernstein(d, alpha, order, sign, step=0.01):
    """Exhaustive grid over feasible monotone-Lipschitz chains."""
    grid0 = np.arange(0.0, 1.0 + 1e-12, step)
    dstep = np.arange(0.0, min(alpha / order, 1.0) + 1e-12, step)
    best = 0.0
    d = np.asarray(d)
    for a0 in grid0:
        chains = [np.array([a0])]
        for _ in range(order):
            new = []
            for ch in chains:
                nxt = ch[-1] + dstep
                nxt = nxt[nxt <= 1.0 + 1e-12]
                for v in nxt:
                    new.append(np.append(ch, v))
            chains = new
        for ch in chains:
            best = max(best, sign * float(ch @ d))
    return best


class TestBernsteinOracle:
    def test_all_positive_saturates(self):
        d = np.array([0.5, 1.0, 0.25])
        a = bernstein_lp_oracle(d, alpha=10.0, order=2, sign=1)
        assert np.allclose(a, 1.0)

    def test_spec_small_case(self):
        a = bernstein_lp_oracle([-1.0, 1.0], alpha=0.5, order=1, sign=1)
        assert np.allclose(a, [0.0, 0.5])
        assert float(a @ [-1.0, 1.0]) == pytest.approx(0.5)

    def test_all_negative_gives_zero(self):
        a = bernstein_lp_oracle([-1.0, -0.3], alpha=1.0, order=1, sign=1)
        assert np.allclose(a, 0.0)

    @given(
        st.integers(1, 3),
        st.floats(0.3, 4.0),
        st.integers(0, 10**6),
    )
    @settings(max_examples=25, deadline=None)
    def test_feasible(self, order, alpha, seed):
        rng = np.random.default_rng(seed)
        d = rng.normal(size=order + 1)
        for sign in (1, -1):
            a = bernstein_lp_oracle(d, alpha, order, sign)
            assert a[0] >= -1e-12
            assert a[-1] <= 1.0 + 1e-12
            assert np.all(np.diff(a) >= -1e-12)
            assert np.all(np.diff(a) <= alpha / order + 1e-12)

    def test_matches_grid_brute_force(self, rng):
        for order in (1, 2):
            for alpha in (0.5, 2.0):
                for _ in range(3):
                    d = rng.normal(size=order + 1)
                    for sign in (1, -1):
                        a = bernstein_lp_oracle(d, alpha, order, sign)
                        lp_obj = sign * float(a @ d)
                        grid_obj = brute_force_bernstein(d, alpha, order, sign)
                        # LP is optimal; grid can lag by its resolution
                        assert lp_obj >= grid_obj - 1e-9
                        assert lp_obj <= grid_obj + 0.02 * np.sum(np.abs(d))

    def test_matches_scipy_linprog(self, rng):
        from scipy.optimize import linprog

        for order in (1, 2, 3):
            d = rng.normal(size=order + 1)
            alpha = 1.5
            for sign in (1, -1):
                ours = sign * float(
                    bernstein_lp_oracle(d, alpha, order, sign) @ d
                )
                # variables a_0..a_V; chain constraints as A_ub
                n = order + 1
                a_ub, b_ub = [], []
                for v in range(1, n):
                    row = np.zeros(n)
                    row[v - 1], row[v] = 1.0, -1.0  # a_{v-1} <= a_v
                    a_ub.append(row)
                    b_ub.append(0.0)
                    row2 = np.zeros(n)
                    row2[v - 1], row2[v] = -1.0, 1.0  # a_v - a_{v-1} <= alpha/V
                    a_ub.append(row2)
                    b_ub.append(alpha / order)
                res = linprog(-sign * d, A_ub=np.array(a_ub), b_ub=np.array(b_ub),
                              bounds=[(0.0, 1.0)] * n, method="highs")
                assert ours == pytest.approx(-res.fun, abs=1e-9)

    def test_select_bernstein_spec_example(self):
        # one point at the right edge: D-functional is (-1, 1) on (q_0, q_1)
        X = np.array([[1.0], [-1.0]])
        points = EvalPoints(X, np.array([1.0, 2.0]),
                            np.array([0, 0], dtype=np.int64), np.array([]))
        sample = SignedSample(points, np.array([1.0, -1.0]))
        # d_v = q_v(1) - q_v(0) = (-1, 1) for order 1 after the domain map
        cfg = DictionaryConfig(families=("bernstein",), weight_scheme="unit",
                               bernstein_order=1, bernstein_lipschitz=10.0)
        weights = DictionaryWeights((), np.zeros(0))
        atom, score = select_atom(cfg, sample, weights)
        assert isinstance(atom, Bernstein)
        assert atom.coeffs == (0.0, 1.0)
        assert score == pytest.approx(1.0)


class TestSigmoidOracle:
    def test_matches_dense_grid(self, rng):
        cfg = DictionaryConfig(families=("sigmoid",), weight_scheme="unit",
                               sigmoid_grid=21, threshold_index=1)
        points = make_points(rng, m=40, dim=2)
        w = rng.normal(size=40)
        weights = DictionaryWeights((), np.zeros(0))
        sample = SignedSample(points, w)
        atom, score = select_atom(cfg, sample, weights)

        x, z = points.X[:, 0], points.X[:, 1]
        wx = w * x
        dx = float(np.sum(wx))
        best = 0.0
        for c1 in np.linspace(-1, 1, 161):
            for c2 in np.linspace(-1, 1, 161):
                dxp = float(wx @ (1.0 / (1.0 + np.exp(-(c1 * z - c2)))))
                best = max(best, abs(dx) + abs(dxp))
        # refined 21x21 grid must come within a fine-grid tolerance (it may
        # exceed the reference grid, which is itself only a discretization)
        assert score >= best - 5e-3 * max(1.0, best)
        assert score == pytest.approx(abs(sample.derivative(atom)), rel=1e-12)
        assert abs(atom.a1) == 1.0 and abs(atom.a2) == 1.0


class TestHawkesOracle:
    def test_finds_planted_decay(self, rng):
        jumps = np.sort(rng.uniform(0, 20, 60))
        times = np.sort(rng.uniform(0, 20, 50))
        njumps = np.searchsorted(jumps, times, side="right").astype(np.int64)
        points = EvalPoints(np.zeros((50, 1)), times, njumps, jumps)
        cfg = DictionaryConfig(families=("hawkes",), weight_scheme="unit",
                               hawkes_decay_range=(0.1, 10.0), hawkes_cap=50.0)
        target = HawkesFeature(decay=1.7, cap=50.0)
        theta = atom_values(target, points.X, times=times,
                            jump_times=jumps, njumps=njumps)
        sample = SignedSample(points, theta - np.mean(theta))
        weights = DictionaryWeights((), np.zeros(0))
        atom, score = select_atom(cfg, sample, weights)
        d_target = sample.derivative(target)
        assert score >= abs(d_target) - 1e-6


class TestWeights:
    def test_unit_scheme(self, rng):
        tl = build_timeline([(0, [0.5, -0.5])], [0.5], 1.0)
        cfg = DictionaryConfig(families=("intercept", "linear"),
                               weight_scheme="unit")
        w = compute_weights(cfg, tl)
        assert np.allclose(w.values, 1.0)

    def test_l2_scheme_excludes_zero_norm(self):
        tl = build_timeline([(0, [0.0, 0.5])], [0.5], 1.0)
        cfg = DictionaryConfig(families=("intercept", "linear"),
                               weight_scheme="empirical_l2")
        w = compute_weights(cfg, tl)
        assert Linear(0) in w.excluded
        assert Linear(0) not in w.atoms
        assert w.weight_of(Linear(1)) == pytest.approx(0.5)

    def test_weight_floor(self):
        tl = build_timeline([(0, [1e-9])], [0.5], 1.0)
        cfg = DictionaryConfig(families=("linear",),
                               weight_scheme="empirical_l2")
        w = compute_weights(cfg, tl)
        assert w.values[0] == pytest.approx(1e-6)

    def test_canonical_enumeration_order(self):
        cfg = DictionaryConfig(
            families=("intercept", "linear", "monomial"),
            monomial_powers=(1, 2),
        )
        atoms = enumerate_finite_atoms(cfg, 2)
        assert atoms == [
            Intercept(), Linear(0), Linear(1),
            Monomial(0, 1), Monomial(0, 2), Monomial(1, 1), Monomial(1, 2),
        ]

    def test_per_coordinate_families(self):
        cfg = DictionaryConfig(
            families=("linear",),
            families_by_coordinate=((1, ("monomial",)),),
            monomial_powers=(2,),
        )
        atoms = enumerate_finite_atoms(cfg, 3)
        assert atoms == [Linear(0), Linear(2), Monomial(1, 2)]

    def test_coordinate_subset(self):
        cfg = DictionaryConfig(families=("linear",), coordinates=(0, 2))
        assert enumerate_finite_atoms(cfg, 4) == [Linear(0), Linear(2)]
