from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phytosense.errors import DegenerateSeries, TooSparse
from phytosense.ingest import RawTrace
from phytosense.preprocess import (UniformSeries, denormalize, downsample_mean,
                                   interpolate_time, read_series_csv,
                                   write_series_csv, zscore, ZScoreParams)


def trace_from(ts_ms, values):
    return RawTrace("p", "stem", np.asarray(ts_ms, dtype=np.int64),
                    np.asarray(values, dtype=float))


class TestDownsample:
    def test_constant_second(self):
        ts = np.arange(200) * 5  # 200 Hz within second 0
        series = downsample_mean(trace_from(ts, np.full(200, 5.0)))
        assert series.values.tolist() == [5.0]

    def test_small_mean(self):
        series = downsample_mean(trace_from([0, 300, 600], [1.0, 2.0, 3.0]))
        assert series.values.tolist() == [2.0]

    def test_random_second_matches_summation_oracle(self):
        rng = np.random.default_rng(1)
        values = rng.uniform(-5, 5, 200)
        series = downsample_mean(trace_from(np.arange(200) * 5, values))
        total = 0.0
        for v in values:  # brute-force summation oracle
            total += v
        assert abs(series.values[0] - total / 200) < 1e-12

    def test_empty_seconds_marked_missing(self):
        series = downsample_mean(trace_from([0, 500, 2500], [1.0, 3.0, 7.0]))
        assert series.values[0] == 2.0
        assert np.isnan(series.values[1])
        assert series.values[2] == 7.0

    def test_grand_mean_preserved(self):
        rng = np.random.default_rng(2)
        ts = np.sort(rng.choice(np.arange(0, 10_000, 5), 900, replace=False))
        values = rng.normal(size=900)
        series = downsample_mean(trace_from(ts, values))
        bins = ts // 1000
        weighted = 0.0
        for b in np.unique(bins):
            idx = int(b - bins[0])
            weighted += series.values[idx] * np.sum(bins == b)
        assert abs(weighted / len(values) - values.mean()) < 1e-9

    def test_wall_clock_alignment(self):
        # samples straddling a second boundary fall in separate bins
        series = downsample_mean(trace_from([900, 1100], [1.0, 3.0]))
        assert series.start_ms == 0
        assert series.values.tolist() == [1.0, 3.0]


class TestInterpolate:
    def test_simple_linear(self):
        values = np.full(11, np.nan)
        values[0], values[10] = 0.0, 10.0
        out = interpolate_time(UniformSeries(0, 1.0, values))
        assert out.values[4] == 4.0

    def test_identity_without_gaps(self):
        values = np.array([1.0, 5.0, 2.0])
        out = interpolate_time(UniformSeries(0, 1.0, values))
        np.testing.assert_array_equal(out.values, values)

    def test_two_point_formula_oracle(self):
        values = np.full(8, np.nan)
        values[0], values[3], values[7] = 2.0, 8.0, 8.0
        out = interpolate_time(UniformSeries(0, 1.0, values))

        def line(t, t0, v0, t1, v1):  # explicit two-point line formula
            return v0 + (v1 - v0) * (t - t0) / (t1 - t0)

        assert abs(out.values[1] - line(1, 0, 2, 3, 8)) < 1e-12
        assert abs(out.values[2] - line(2, 0, 2, 3, 8)) < 1e-12
        assert abs(out.values[5] - line(5, 3, 8, 7, 8)) < 1e-12
        assert out.values[1] == 4.0 and out.values[2] == 6.0 and out.values[5] == 8.0

    def test_edge_gaps_extend_nearest(self):
        values = np.full(6, np.nan)
        values[2], values[3] = 5.0, 7.0
        out = interpolate_time(UniformSeries(0, 1.0, values))
        assert out.values.tolist() == [5.0, 5.0, 5.0, 7.0, 7.0, 7.0]

    def test_too_sparse(self):
        values = np.full(5, np.nan)
        values[2] = 1.0
        with pytest.raises(TooSparse):
            interpolate_time(UniformSeries(0, 1.0, values))

    @settings(max_examples=25, deadline=None)
    @given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=2, max_size=8),
           st.integers(1, 5))
    def test_interior_gaps_bounded_by_neighbors(self, anchors, gap):
        values = []
        for i, v in enumerate(anchors):
            values.append(v)
            if i < len(anchors) - 1:
                values.extend([np.nan] * gap)
        out = interpolate_time(UniformSeries(0, 1.0, np.array(values)))
        pos = 0
        for left, right in zip(anchors[:-1], anchors[1:]):
            lo, hi = min(left, right), max(left, right)
            segment = out.values[pos + 1:pos + 1 + gap]
            assert np.all(segment >= lo - 1e-12) and np.all(segment <= hi + 1e-12)
            pos += gap + 1


class TestZScore:
    def test_one_two_three_oracle(self):
        # direct two-pass mean/std computation as the oracle
        data = np.array([1.0, 2.0, 3.0])
        mu = sum(data) / 3
        sigma = (sum((v - mu) ** 2 for v in data) / 3) ** 0.5
        out, params = zscore(UniformSeries(0, 1.0, data))
        assert params.mu == mu and abs(params.sigma - sigma) < 1e-15
        expected = [(v - mu) / sigma for v in data]
        np.testing.assert_allclose(out.values, expected, atol=1e-12)
        assert abs(out.values[0] + 1.224744871391589) < 1e-12
        assert abs(params.sigma - np.sqrt(2.0 / 3.0)) < 1e-15

    def test_moments_after_normalization(self):
        rng = np.random.default_rng(3)
        out, _ = zscore(UniformSeries(0, 1.0, rng.normal(5, 3, 1000)))
        assert abs(out.values.mean()) < 1e-9
        assert abs(out.values.std() - 1.0) < 1e-9

    def test_idempotent(self):
        rng = np.random.default_rng(4)
        once, _ = zscore(UniformSeries(0, 1.0, rng.normal(size=500)))
        twice, _ = zscore(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-9)

    def test_constant_raises(self):
        with pytest.raises(DegenerateSeries):
            zscore(UniformSeries(0, 1.0, np.array([4.0, 4.0, 4.0])))

    def test_denormalize_round_trip(self):
        rng = np.random.default_rng(5)
        values = rng.normal(-40, 7, 800)
        out, params = zscore(UniformSeries(0, 1.0, values))
        back = denormalize(out, params)
        np.testing.assert_allclose(back.values, values, rtol=1e-9)


class TestSerialization:
    def test_series_round_trip_with_gaps(self, tmp_path):
        values = np.array([1.5, np.nan, 3.25, np.nan, np.nan, -2.0])
        series = UniformSeries(12_000, 1.0, values, plant_id="p", channel="leaf")
        write_series_csv(series, tmp_path / "s.csv", ZScoreParams(1.0, 2.0))
        back, params = read_series_csv(tmp_path / "s.csv")
        np.testing.assert_array_equal(back.values, values)
        assert back.start_ms == 12_000 and back.channel == "leaf"
        assert params.mu == 1.0 and params.sigma == 2.0
