import numpy as np
import pytest

from fwintensity.dictionary import Intercept, Linear
from fwintensity.errors import (
    DimensionMismatch,
    EmptyUpdates,
    NonMonotoneTimes,
    OutOfRange,
    ZeroNormAtom,
)
from fwintensity.timeline import (
    build_timeline,
    concat,
    covariate_at,
    empirical_l2_weight,
    read_timeline,
    window,
    winsorize_standardize,
    write_covariates_csv,
    write_events_csv,
)

from conftest import random_timeline


class TestBuild:
    def test_minimal(self):
        tl = build_timeline([(0, [1.0])], [0.5], 1.0)
        assert tl.n_jumps == 1
        assert tl.dim == 1

    def test_duplicate_jumps_rejected(self):
        with pytest.raises(NonMonotoneTimes):
            build_timeline([(0, [1.0])], [0.5, 0.5], 1.0)

    def test_two_segments(self):
        tl = build_timeline([(0, [1.0]), (2, [5.0])], [3.0], 4.0)
        segs = tl.segments
        # pieces split at the update (t=2) and the jump (t=3)
        assert list(segs.starts) == [0.0, 2.0, 3.0]
        assert list(segs.values.ravel()) == [1.0, 5.0, 5.0]
        assert np.isclose(np.sum(segs.dts), 4.0)

    def test_duplicate_updates_rejected(self):
        with pytest.raises(NonMonotoneTimes):
            build_timeline([(0, [1.0]), (0.5, [2.0]), (0.5, [3.0])], [1.0], 2.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            build_timeline([(0, [1.0]), (1, [1.0, 2.0])], [0.5], 2.0)

    def test_empty_updates(self):
        with pytest.raises(EmptyUpdates):
            build_timeline([], [0.5], 1.0)

    def test_jump_outside_horizon_rejected(self):
        with pytest.raises(OutOfRange):
            build_timeline([(0, [1.0])], [1.5], 1.0)
        with pytest.raises(OutOfRange):
            build_timeline([(0, [1.0])], [-0.5, 0.5], 1.0)

    def test_negative_update_time_clamped(self):
        tl = build_timeline([(-2.0, [1.0]), (1.0, [2.0])], [0.5], 2.0)
        assert tl.update_times[0] == 0.0

    def test_unsorted_input_is_sorted(self):
        tl = build_timeline([(1.0, [2.0]), (0.0, [1.0])], [1.5, 0.5], 2.0)
        assert list(tl.update_times) == [0.0, 1.0]
        assert list(tl.jump_times) == [0.5, 1.5]


class TestCovariateAt:
    def setup_method(self):
        self.tl = build_timeline([(0, [1.0]), (2, [5.0])], [3.0], 4.0)

    def test_inside_first_segment(self):
        assert covariate_at(self.tl, 1.0)[0] == 1.0

    def test_left_continuous_at_update(self):
        assert covariate_at(self.tl, 2.0)[0] == 1.0

    def test_after_update(self):
        assert covariate_at(self.tl, 2.5)[0] == 5.0

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            covariate_at(self.tl, 0.0)
        with pytest.raises(OutOfRange):
            covariate_at(self.tl, 4.5)

    def test_roundtrip_inside_segments(self, rng):
        tl = random_timeline(rng, n_jumps=5, dim=3, n_updates=7)
        edges = np.append(tl.update_times, tl.horizon)
        for i in range(len(tl.update_times)):
            lo, hi = edges[i], edges[i + 1]
            if hi - lo <= 1e-9:
                continue
            probe = lo + 0.5 * (hi - lo)
            assert np.array_equal(tl.covariate_at(probe), tl.update_values[i])


class TestWinsorize:
    def test_constant_coordinate(self):
        tl = build_timeline([(0, [2.0])], [0.5], 1.0)
        scaled, tf = winsorize_standardize(tl)
        assert tf.caps[0] == 2.0
        assert scaled.update_values[0, 0] == 1.0

    def test_already_unit_cap_unchanged(self):
        # half the time at 0.5, half at the cap 1.0
        tl = build_timeline([(0, [0.5]), (1, [1.0])], [1.5], 2.0)
        scaled, tf = winsorize_standardize(tl)
        assert tf.caps[0] == 1.0
        assert np.array_equal(scaled.update_values, tl.update_values)

    def test_time_weighted_quantile(self):
        # value 1 for 90% of the time, 10 for the remaining 10%
        tl = build_timeline([(0, [1.0]), (9, [10.0])], [5.0], 10.0)
        scaled, tf = winsorize_standardize(tl, q=0.95)
        assert tf.caps[0] == 10.0
        assert np.allclose(scaled.update_values.ravel(), [0.1, 1.0])

    def test_time_weighted_quantile_clips(self):
        # value 1 for 96% of the time: the 10s get clipped down
        tl = build_timeline([(0, [1.0]), (9.6, [10.0])], [5.0], 10.0)
        scaled, tf = winsorize_standardize(tl, q=0.95)
        assert tf.caps[0] == 1.0
        assert np.allclose(scaled.update_values.ravel(), [1.0, 1.0])

    def test_degenerate_coordinate_flagged(self):
        tl = build_timeline([(0, [0.0, 1.0])], [0.5], 1.0)
        scaled, tf = winsorize_standardize(tl)
        assert tf.degenerate == (0,)
        assert scaled.update_values[0, 0] == 0.0

    def test_pipeline_idempotent(self, rng):
        tl = random_timeline(rng, n_jumps=6, dim=2, n_updates=9)
        once, tf1 = winsorize_standardize(tl)
        twice, tf2 = winsorize_standardize(once)
        assert np.allclose(tf2.caps, 1.0)
        assert np.allclose(twice.update_values, once.update_values)

    def test_transform_maps_held_out_data(self):
        tl = build_timeline([(0, [4.0])], [0.5], 1.0)
        _, tf = winsorize_standardize(tl)
        held_out = build_timeline([(0, [8.0]), (1, [-8.0])], [0.5], 2.0)
        mapped = tf.apply(held_out)
        assert np.allclose(mapped.update_values.ravel(), [1.0, -1.0])


class TestEmpiricalL2Weight:
    def test_intercept_is_one(self, rng):
        tl = random_timeline(rng)
        assert empirical_l2_weight(tl, Intercept()) == pytest.approx(1.0)

    def test_constant_path(self):
        tl = build_timeline([(0, [0.5])], [0.5], 1.0)
        assert empirical_l2_weight(tl, Linear(0)) == pytest.approx(0.5)

    def test_two_equal_segments(self):
        tl = build_timeline([(0, [0.0]), (1, [1.0])], [0.5], 2.0)
        assert empirical_l2_weight(tl, Linear(0)) == pytest.approx(np.sqrt(0.5))

    def test_zero_norm(self):
        tl = build_timeline([(0, [0.0])], [0.5], 1.0)
        with pytest.raises(ZeroNormAtom):
            empirical_l2_weight(tl, Linear(0))

    def test_matches_riemann_quadrature(self, rng):
        from conftest import midpoint_quadrature

        tl = random_timeline(rng, n_jumps=4, dim=2, n_updates=6)
        exact = empirical_l2_weight(tl, Linear(1))
        integral = midpoint_quadrature(
            lambda t: tl.covariate_at(t)[1] ** 2, tl, step=1e-3
        )
        assert exact == pytest.approx(np.sqrt(integral / tl.horizon), rel=1e-8)


class TestWindowConcat:
    def test_window_preserves_path(self, rng):
        tl = random_timeline(rng, n_jumps=10, dim=2, n_updates=8)
        t0 = float(tl.jump_times[4])
        w = window(tl, t0, tl.horizon)
        for probe in np.linspace(t0 + 1e-6, tl.horizon - 1e-6, 7):
            assert np.allclose(
                w.covariate_at(probe - t0), tl.covariate_at(probe)
            )
        assert w.n_jumps == tl.n_jumps - 5

    def test_concat_roundtrip(self, rng):
        tl = random_timeline(rng, n_jumps=10, dim=2, n_updates=8)
        t0 = float(tl.jump_times[4])
        first = window(tl, 0.0, t0)
        second = window(tl, t0, tl.horizon)
        joined = concat(first, second)
        assert joined.n_jumps == tl.n_jumps
        assert joined.horizon == pytest.approx(tl.horizon)
        for probe in np.linspace(1e-6, tl.horizon - 1e-6, 11):
            assert np.allclose(
                joined.covariate_at(probe), tl.covariate_at(probe)
            )


class TestCsvRoundtrip:
    def test_roundtrip(self, tmp_path, rng):
        tl = random_timeline(rng, n_jumps=6, dim=3, n_updates=5)
        write_events_csv(tmp_path / "events.csv", tl.jump_times)
        write_covariates_csv(
            tmp_path / "covariates.csv", tl.update_times, tl.update_values
        )
        back = read_timeline(
            tmp_path / "events.csv", tmp_path / "covariates.csv", tl.horizon
        )
        assert np.array_equal(back.jump_times, tl.jump_times)
        assert np.array_equal(back.update_times, tl.update_times)
        assert np.array_equal(back.update_values, tl.update_values)
