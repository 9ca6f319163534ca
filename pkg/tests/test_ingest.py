from __future__ import annotations

import numpy as np
import pytest

from phytosense.errors import EmptyFile, MalformedRow, NonMonotoneTimestamp
from phytosense.ingest import (RawTrace, coverage_filter, parse_env_csv,
                               parse_trace_csv, write_env_csv, write_trace_csv)
from phytosense.preprocess import UniformSeries

TRACE_HEADER = "timestamp_ms,potential_mv,plant_id,channel\n"
ENV_HEADER = ("timestamp_ms,wind_speed,wind_dir,air_temp,rel_humidity,"
              "solar_irradiance,precipitation,dew_point\n")


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParseTrace:
    def test_three_row_valid(self, tmp_path):
        path = write(tmp_path, "t.csv", TRACE_HEADER +
                     "1000,1.5,p1,stem\n2000,2.5,p1,stem\n3000,3.5,p1,stem\n")
        trace = parse_trace_csv(path)
        assert len(trace) == 3
        assert trace.plant_id == "p1" and trace.channel == "stem"
        assert trace.timestamps_ms.tolist() == [1000, 2000, 3000]
        assert trace.potential_mv.tolist() == [1.5, 2.5, 3.5]

    def test_non_numeric_potential_reports_line(self, tmp_path):
        path = write(tmp_path, "t.csv", TRACE_HEADER +
                     "1000,1.5,p1,stem\n2000,abc,p1,stem\n")
        with pytest.raises(MalformedRow) as err:
            parse_trace_csv(path)
        assert err.value.line_number == 3

    def test_duplicate_timestamps_keep_first(self, tmp_path):
        # oracle: dedup by linear scan over the written rows
        rows = [(1000, 1.0), (2000, 2.0), (2000, 9.0), (3000, 3.0), (3000, 8.0)]
        seen, expected = set(), []
        for ts, mv in rows:
            if ts not in seen:
                seen.add(ts)
                expected.append((ts, mv))
        body = "".join(f"{ts},{mv},p1,leaf\n" for ts, mv in rows)
        trace = parse_trace_csv(write(tmp_path, "t.csv", TRACE_HEADER + body))
        assert trace.duplicate_warnings == len(rows) - len(expected)
        assert list(zip(trace.timestamps_ms.tolist(),
                        trace.potential_mv.tolist())) == expected

    def test_empty_file(self, tmp_path):
        with pytest.raises(EmptyFile):
            parse_trace_csv(write(tmp_path, "t.csv", TRACE_HEADER))
        with pytest.raises(EmptyFile):
            parse_trace_csv(write(tmp_path, "zero.csv", ""))

    def test_shuffled_timestamps_rejected(self, tmp_path):
        path = write(tmp_path, "t.csv", TRACE_HEADER +
                     "3000,1,p1,stem\n1000,2,p1,stem\n4000,3,p1,stem\n2000,4,p1,stem\n")
        with pytest.raises(NonMonotoneTimestamp):
            parse_trace_csv(path)

    def test_single_adjacent_swap_repaired(self, tmp_path):
        path = write(tmp_path, "t.csv", TRACE_HEADER +
                     "1000,1,p1,stem\n3000,3,p1,stem\n2000,2,p1,stem\n4000,4,p1,stem\n")
        trace = parse_trace_csv(path)
        assert trace.timestamps_ms.tolist() == [1000, 2000, 3000, 4000]
        assert trace.potential_mv.tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_mixed_plants_rejected(self, tmp_path):
        path = write(tmp_path, "t.csv", TRACE_HEADER +
                     "1000,1,p1,stem\n2000,2,p2,stem\n")
        with pytest.raises(MalformedRow):
            parse_trace_csv(path)

    def test_bad_header(self, tmp_path):
        path = write(tmp_path, "t.csv", "time,mv,plant,chan\n1,2,p,stem\n")
        with pytest.raises(MalformedRow) as err:
            parse_trace_csv(path)
        assert err.value.line_number == 1

    def test_round_trip_lossless(self, tmp_path):
        rng = np.random.default_rng(4)
        trace = RawTrace("p7", "leaf",
                         np.arange(0, 5000, 250, dtype=np.int64),
                         rng.normal(size=20))
        path = tmp_path / "round.csv"
        write_trace_csv(trace, path)
        back = parse_trace_csv(path)
        assert back.timestamps_ms.tolist() == trace.timestamps_ms.tolist()
        assert back.potential_mv.tolist() == trace.potential_mv.tolist()


class TestParseEnv:
    def test_valid_row(self, tmp_path):
        path = write(tmp_path, "e.csv", ENV_HEADER +
                     "1000,0.5,180,21.5,65,400,0,14.2\n")
        env = parse_env_csv(path)
        assert len(env) == 1
        assert env.fields["air_temp"][0] == 21.5
        assert env.fields["solar_irradiance"][0] == 400.0

    def test_empty_cell_is_missing_field(self, tmp_path):
        path = write(tmp_path, "e.csv", ENV_HEADER +
                     "1000,0.5,180,21.5,65,400,,14.2\n")
        env = parse_env_csv(path)
        assert np.isnan(env.fields["precipitation"][0])
        assert env.fields["dew_point"][0] == 14.2

    def test_shuffled_timestamps_rejected(self, tmp_path):
        rows = "\n".join(f"{ts},0,0,20,50,100,0,10" for ts in (5000, 1000, 9000, 2000))
        with pytest.raises(NonMonotoneTimestamp):
            parse_env_csv(write(tmp_path, "e.csv", ENV_HEADER + rows + "\n"))

    def test_round_trip_with_missing(self, tmp_path):
        from phytosense.ingest import ENV_FIELDS, EnvSeries

        ts = np.array([0, 10_000, 20_000], dtype=np.int64)
        fields = {name: np.array([1.0, np.nan, 3.25]) for name in ENV_FIELDS}
        path = tmp_path / "e.csv"
        write_env_csv(EnvSeries(ts, fields), path)
        back = parse_env_csv(path)
        for name in ENV_FIELDS:
            np.testing.assert_array_equal(back.fields[name], fields[name])


def trace_of_seconds(seconds, day_ms=0):
    ts = (np.asarray(seconds, dtype=np.int64) * 1000) + day_ms
    return RawTrace("p", "stem", ts, np.ones(len(ts)))


class TestCoverageFilter:
    def test_full_day_retained(self):
        trace = trace_of_seconds(range(86_400))
        filtered, report = coverage_filter(trace, 1.0)
        assert len(report.days) == 1
        assert report.days[0].coverage == 1.0
        assert report.days[0].retained
        assert len(filtered) == 86_400

    def test_just_below_threshold_excluded(self):
        # 69,119 of 86,400 -> coverage 0.79999... -> excluded ("less than 80%")
        trace = trace_of_seconds(range(69_119))
        _, report = coverage_filter(trace, 1.0)
        assert report.days[0].coverage < 0.8
        assert not report.days[0].retained
        trace = trace_of_seconds(range(69_120))  # exactly 80% retained
        _, report = coverage_filter(trace, 1.0)
        assert report.days[0].retained

    def test_three_day_mixed_coverage(self):
        # oracle: brute-force per-day sample counting
        day = 86_400
        seconds = (list(range(day))                                # 1.0
                   + [day + s for s in range(day // 2)]            # 0.5
                   + [2 * day + s for s in range(int(day * 0.9))])  # 0.9
        trace = trace_of_seconds(seconds)
        counts = {}
        for s in seconds:
            counts[s // day] = counts.get(s // day, 0) + 1
        filtered, report = coverage_filter(trace, 1.0)
        assert [d.present_samples for d in report.days] == [counts[0], counts[1], counts[2]]
        assert [d.retained for d in report.days] == [True, False, True]
        assert len(filtered) == counts[0] + counts[2]

    def test_per_day_sums_equal_total(self):
        rng = np.random.default_rng(9)
        seconds = np.unique(rng.integers(0, 86_400 * 3, 5000))
        trace = trace_of_seconds(seconds)
        _, report = coverage_filter(trace, 1.0)
        assert sum(d.present_samples for d in report.days) == len(seconds)

    def test_idempotent_on_uniform_series(self):
        values = np.ones(86_400 * 2)
        values[86_400:] = np.nan  # day 2 fully missing
        values[1000:40_000] = np.nan  # day 1 at ~55% coverage -> excluded
        series = UniformSeries(start_ms=0, rate_hz=1.0, values=values)
        once, report1 = coverage_filter(series, 1.0)
        twice, report2 = coverage_filter(once, 1.0)
        np.testing.assert_array_equal(once.values, twice.values)
        assert [d.retained for d in report1.days] == [d.retained for d in report2.days]

    def test_report_json_shape(self):
        trace = trace_of_seconds(range(86_400))
        _, report = coverage_filter(trace, 1.0)
        import json

        entries = json.loads(report.to_json())
        assert entries[0]["day"] == "1970-01-01"
        assert entries[0]["retained"] is True
        assert entries[0]["coverage"] == 1.0
