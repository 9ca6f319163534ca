from __future__ import annotations

import numpy as np
import pytest

from phytosense.errors import MissingValue
from phytosense.ingest import ENV_FIELDS, EnvSeries
from phytosense.labeling import (STANDARD_RULES, classify_env_sample,
                                 extract_windows, read_windows_csv,
                                 write_windows_csv)
from phytosense.preprocess import UniformSeries


def make_env(irradiance=None, temp=None, wind=None, precip=None, n=None,
             start_ms=0):
    """EnvSeries at 10 s cadence; per-field arrays or scalars."""
    n = n if n is not None else len(next(a for a in (irradiance, temp, wind, precip)
                                         if a is not None))
    ts = start_ms + np.arange(n, dtype=np.int64) * 10_000
    fields = {name: np.zeros(n) for name in ENV_FIELDS}
    fields["rel_humidity"] += 50.0
    if irradiance is not None:
        fields["solar_irradiance"] = np.broadcast_to(np.asarray(irradiance, float),
                                                     (n,)).copy()
    if temp is not None:
        fields["air_temp"] = np.broadcast_to(np.asarray(temp, float), (n,)).copy()
    if wind is not None:
        fields["wind_speed"] = np.broadcast_to(np.asarray(wind, float), (n,)).copy()
    if precip is not None:
        fields["precipitation"] = np.broadcast_to(np.asarray(precip, float),
                                                  (n,)).copy()
    return EnvSeries(ts, fields)


class TestClassify:
    def test_irradiance_above_threshold_is_day(self):
        assert classify_env_sample(STANDARD_RULES["day_night"], 60.0) == "Day"
        assert classify_env_sample(STANDARD_RULES["day_night"], 50.0) == "Night"

    def test_precipitation_rule(self):
        assert classify_env_sample(STANDARD_RULES["rain_dry"], 0.0) == "Dry"
        assert classify_env_sample(STANDARD_RULES["rain_dry"], 0.2) == "Rain"

    def test_temperature_boundary_goes_cold(self):
        assert classify_env_sample(STANDARD_RULES["warm_cold"], 25.0) == "Cold"
        assert classify_env_sample(STANDARD_RULES["warm_cold"], 25.01) == "Warm"

    def test_missing_value(self):
        with pytest.raises(MissingValue):
            classify_env_sample(STANDARD_RULES["day_night"], float("nan"))


def flat_series(hours, start_ms=0):
    return UniformSeries(start_ms, 1.0, np.arange(hours * 3600, dtype=float),
                         plant_id="p", channel="stem")


class TestExtractWindows:
    def test_pure_day_hour(self):
        env = make_env(irradiance=np.full(360, 80.0))
        windows, report = extract_windows(flat_series(1), env,
                                          STANDARD_RULES["day_night"])
        assert len(windows) == 1
        assert windows[0].label == "Day"
        assert len(windows[0].values) == 3600
        assert report.emitted == 1

    def test_mixed_hour_skipped(self):
        irr = np.full(360, 80.0)
        irr[:100] = 10.0  # morning twilight inside the hour
        windows, report = extract_windows(flat_series(1), make_env(irradiance=irr),
                                          STANDARD_RULES["day_night"])
        assert windows == []
        assert report.impure_env == 1

    def test_missing_env_sample_disqualifies(self):
        irr = np.full(360, 80.0)
        irr[7] = np.nan
        _, report = extract_windows(flat_series(1), make_env(irradiance=irr),
                                    STANDARD_RULES["day_night"])
        assert report.missing_env == 1

    def test_short_env_hour_disqualifies(self):
        env = make_env(irradiance=np.full(300, 80.0))  # 60 readings short
        _, report = extract_windows(flat_series(1), env,
                                    STANDARD_RULES["day_night"])
        assert report.missing_env == 1

    def test_incomplete_signal_skipped(self):
        series = flat_series(1)
        series.values[100] = np.nan
        _, report = extract_windows(series, make_env(irradiance=np.full(360, 80.0)),
                                    STANDARD_RULES["day_night"])
        assert report.incomplete_signal == 1

    def test_sine_day_against_hourly_brute_force(self):
        # irradiance = 800 * max(0, sin(pi*(t - 6h)/12h)) over one full day
        n = 8640
        t_hours = np.arange(n) * 10 / 3600.0
        irr = 800.0 * np.maximum(0.0, np.sin(np.pi * (t_hours - 6.0) / 12.0))
        env = make_env(irradiance=irr)
        windows, _ = extract_windows(flat_series(24), env,
                                     STANDARD_RULES["day_night"])

        expected = {}  # brute-force scan over all 24 hours
        for hour in range(24):
            block = irr[hour * 360:(hour + 1) * 360]
            if np.all(block > 50.0):
                expected[hour] = "Day"
            elif np.all(block <= 50.0):
                expected[hour] = "Night"
        got = {w.start_ms // 3_600_000: w.label for w in windows}
        assert got == expected
        assert set(expected.values()) == {"Day", "Night"}  # both present

    def test_time_restriction_window(self):
        env = make_env(temp=np.full(8640, 30.0), n=8640)
        windows, report = extract_windows(flat_series(24), env,
                                          STANDARD_RULES["warm_cold"])
        hours = sorted(w.start_ms // 3_600_000 for w in windows)
        assert hours == list(range(8, 20))
        assert report.outside_restriction == 12
        assert all(w.label == "Warm" for w in windows)

    def test_time_restriction_respects_utc_offset(self):
        env = make_env(temp=np.full(8640, 30.0), n=8640)
        windows, _ = extract_windows(flat_series(24), env,
                                     STANDARD_RULES["warm_cold"],
                                     utc_offset_hours=2)
        hours = sorted(w.start_ms // 3_600_000 for w in windows)
        assert hours == list(range(6, 18))  # local 8..19 = UTC 6..17

    def test_windows_disjoint_within_task(self):
        env = make_env(irradiance=np.full(3 * 360, 80.0))
        windows, _ = extract_windows(flat_series(3), env,
                                     STANDARD_RULES["day_night"])
        spans = sorted((w.start_ms, w.start_ms + 3_600_000) for w in windows)
        for (s1, e1), (s2, _) in zip(spans[:-1], spans[1:]):
            assert e1 <= s2

    def test_majority_mode(self):
        irr = np.full(360, 80.0)
        irr[:100] = 10.0  # 260 day vs 100 night readings
        windows, _ = extract_windows(flat_series(1), make_env(irradiance=irr),
                                     STANDARD_RULES["day_night"], mode="majority")
        assert len(windows) == 1 and windows[0].label == "Day"

    def test_cross_task_overlap_allowed(self):
        # the same hour can be both Cold and Dry
        env = make_env(temp=np.full(360, 10.0), precip=np.full(360, 0.0),
                       start_ms=8 * 3_600_000)
        series = UniformSeries(8 * 3_600_000, 1.0,
                               np.arange(3600, dtype=float),
                               plant_id="p", channel="stem")
        cold, _ = extract_windows(series, env, STANDARD_RULES["warm_cold"])
        dry, _ = extract_windows(series, env, STANDARD_RULES["rain_dry"])
        assert len(cold) == 1 and cold[0].label == "Cold"
        assert len(dry) == 1 and dry[0].label == "Dry"
        assert cold[0].start_ms == dry[0].start_ms

    def test_window_csv_round_trip(self, tmp_path):
        env = make_env(irradiance=np.full(720, 80.0))
        windows, _ = extract_windows(flat_series(2), env,
                                     STANDARD_RULES["day_night"])
        path = tmp_path / "w.csv"
        write_windows_csv(windows, path)
        back = read_windows_csv(path, "day_night")
        assert len(back) == len(windows)
        for a, b in zip(windows, back):
            assert (a.plant_id, a.channel, a.start_ms, a.label) == \
                   (b.plant_id, b.channel, b.start_ms, b.label)
            np.testing.assert_array_equal(a.values, b.values)
