"""Parsing and validation of trace/environment CSV files plus the daily coverage rule.

Input formats
-------------
Trace CSV:  header ``timestamp_ms,potential_mv,plant_id,channel`` with
channel in {stem, leaf}; UTF-8, comma separated, ``.`` decimal.
Env CSV:    header ``timestamp_ms,wind_speed,wind_dir,air_temp,rel_humidity,
solar_irradiance,precipitation,dew_point``; an empty cell marks a missing
reading for that field only.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import EmptyFile, MalformedRow, NonMonotoneTimestamp

MS_PER_DAY = 86_400_000

TRACE_HEADER = ["timestamp_ms", "potential_mv", "plant_id", "channel"]
ENV_HEADER = [
    "timestamp_ms",
    "wind_speed",
    "wind_dir",
    "air_temp",
    "rel_humidity",
    "solar_irradiance",
    "precipitation",
    "dew_point",
]
ENV_FIELDS = ENV_HEADER[1:]
CHANNELS = ("stem", "leaf")


@dataclass
class RawTrace:
    """Electrical-potential samples of one plant/channel at the native rate."""

    plant_id: str
    channel: str
    timestamps_ms: np.ndarray  # int64, strictly increasing
    potential_mv: np.ndarray  # float64
    duplicate_warnings: int = 0

    def __len__(self) -> int:
        return len(self.timestamps_ms)


@dataclass
class EnvSeries:
    """Weather-station records at nominal 0.1 Hz; NaN marks a missing field."""

    timestamps_ms: np.ndarray  # int64, strictly increasing
    fields: dict[str, np.ndarray]  # float64 per ENV_FIELDS name

    def __len__(self) -> int:
        return len(self.timestamps_ms)


@dataclass
class CoverageDay:
    day: str  # YYYY-MM-DD (UTC unless an offset was applied)
    expected_samples: int
    present_samples: int
    coverage: float
    retained: bool


@dataclass
class CoverageReport:
    threshold: float
    days: list[CoverageDay] = field(default_factory=list)

    def retained_days(self) -> set[str]:
        return {d.day for d in self.days if d.retained}

    def to_json(self) -> str:
        entries = [
            {
                "day": d.day,
                "expected_samples": d.expected_samples,
                "present_samples": d.present_samples,
                "coverage": d.coverage,
                "retained": d.retained,
            }
            for d in self.days
        ]
        return json.dumps(entries, indent=2)


def _day_label(day_index: int) -> str:
    ts = day_index * 86_400
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def _slow_scan(path: Path, header: list[str], numeric_cols: list[str],
               required: set[str]) -> None:
    """Re-read a file that failed the fast path to report the bad line."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise EmptyFile(str(path)) from None
        if [h.strip() for h in head] != header:
            raise MalformedRow(1, f"header must be {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise MalformedRow(lineno, f"expected {len(header)} fields, got {len(row)}")
            for col, value in zip(header, row):
                if col not in numeric_cols:
                    continue
                if value.strip() == "":
                    if col in required:
                        raise MalformedRow(lineno, f"empty {col}")
                    continue
                try:
                    parsed = float(value)
                except ValueError:
                    raise MalformedRow(lineno, f"non-numeric {col}: {value!r}") from None
                if not np.isfinite(parsed):
                    raise MalformedRow(lineno, f"non-finite {col}: {value!r}")
    # fast path failed but the scan found nothing: surface a generic error
    raise MalformedRow(2, "unparseable content")


def _read_csv(path: Path, header: list[str], numeric_cols: list[str],
              required: set[str]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        df = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise EmptyFile(str(path)) from None
    if list(df.columns) != header:
        raise MalformedRow(1, f"header must be {','.join(header)}")
    if len(df) == 0:
        raise EmptyFile(str(path))
    for col in numeric_cols:
        stripped = df[col].str.strip()
        blank = (stripped == "").to_numpy()
        probe = pd.to_numeric(stripped, errors="coerce").to_numpy()
        bad = (np.isnan(probe) & ~blank) | np.isinf(probe)
        if col in required:
            bad = bad | blank
        if bad.any():
            _slow_scan(path, header, numeric_cols, required)
        # exact conversion: numpy's parser is correctly rounded, to_numeric's
        # fast path is not, and round-tripping must be lossless
        values = np.full(len(df), np.nan)
        if (~blank).any():
            values[~blank] = stripped.to_numpy()[~blank].astype(np.float64)
        df[col] = values
    return df


def _restore_order(ts: np.ndarray) -> np.ndarray | None:
    """Return a row order fixing a single adjacent transposition, or None.

    One displaced row (swapped with its neighbour) is treated as a benign
    export hiccup; any larger disorder signals corruption.
    """
    drops = np.flatnonzero(np.diff(ts) < 0)
    if len(drops) == 0:
        return np.arange(len(ts))
    if len(drops) != 1:
        return None
    i = int(drops[0])
    order = np.arange(len(ts))
    order[i], order[i + 1] = order[i + 1], order[i]
    fixed = ts[order]
    if np.all(np.diff(fixed) >= 0):
        return order
    return None


def _dedup_keep_first(ts: np.ndarray) -> tuple[np.ndarray, int]:
    """Indices of first occurrences among equal consecutive timestamps."""
    keep = np.concatenate(([True], np.diff(ts) > 0))
    return np.flatnonzero(keep), int((~keep).sum())


def parse_trace_csv(path: str | Path) -> RawTrace:
    """Parse one trace CSV into a RawTrace with strictly increasing timestamps.

    Duplicate timestamps are collapsed keeping the first occurrence and
    counted in ``duplicate_warnings``.
    """
    df = _read_csv(Path(path), TRACE_HEADER, ["timestamp_ms", "potential_mv"],
                   required={"timestamp_ms", "potential_mv"})
    plants = df["plant_id"].str.strip().unique()
    channels = df["channel"].str.strip().str.lower().unique()
    if len(plants) != 1 or len(channels) != 1:
        raise MalformedRow(2, "mixed plant_id/channel values in one trace file")
    channel = channels[0]
    if channel not in CHANNELS:
        raise MalformedRow(2, f"channel must be one of {CHANNELS}, got {channel!r}")

    ts = df["timestamp_ms"].to_numpy(dtype=np.int64)
    mv = df["potential_mv"].to_numpy(dtype=np.float64)
    order = _restore_order(ts)
    if order is None:
        raise NonMonotoneTimestamp(str(path))
    ts, mv = ts[order], mv[order]
    keep, dups = _dedup_keep_first(ts)
    return RawTrace(plant_id=str(plants[0]), channel=channel,
                    timestamps_ms=ts[keep], potential_mv=mv[keep],
                    duplicate_warnings=dups)


def parse_env_csv(path: str | Path) -> EnvSeries:
    """Parse the weather-station CSV; empty cells become NaN for that field."""
    df = _read_csv(Path(path), ENV_HEADER, ENV_HEADER, required={"timestamp_ms"})
    ts = df["timestamp_ms"].to_numpy(dtype=np.int64)
    order = _restore_order(ts)
    if order is None:
        raise NonMonotoneTimestamp(str(path))
    keep, _ = _dedup_keep_first(ts[order])
    idx = order[keep]
    fields = {name: df[name].to_numpy(dtype=np.float64)[idx] for name in ENV_FIELDS}
    return EnvSeries(timestamps_ms=ts[idx], fields=fields)


def write_trace_csv(trace: RawTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for t, v in zip(trace.timestamps_ms.tolist(), trace.potential_mv.tolist()):
            writer.writerow([t, repr(v), trace.plant_id, trace.channel])


def write_env_csv(env: EnvSeries, path: str | Path) -> None:
    columns = [env.fields[name] for name in ENV_FIELDS]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(ENV_HEADER)
        for i, t in enumerate(env.timestamps_ms.tolist()):
            row = [t]
            for col in columns:
                v = col[i]
                row.append("" if np.isnan(v) else repr(float(v)))
            writer.writerow(row)


def _per_day_presence(ts_days: np.ndarray, present: np.ndarray) -> dict[int, int]:
    counts: dict[int, int] = {}
    for day in np.unique(ts_days):
        counts[int(day)] = int(present[ts_days == day].sum())
    return counts


def coverage_filter(series, expected_rate: float, threshold: float = 0.8,
                    day_offset_ms: int = 0):
    """Drop days whose data coverage falls below ``threshold``.

    Works on a RawTrace (samples of excluded days removed) or a
    preprocess.UniformSeries (slots of excluded days set to NaN so the grid
    stays intact).  Day boundaries are UTC midnight shifted by
    ``day_offset_ms``.  Returns ``(filtered, CoverageReport)``.
    """
    if expected_rate <= 0:
        raise ValueError("expected_rate must be positive")
    expected = int(round(expected_rate * 86_400))

    from .preprocess import UniformSeries  # local import to avoid a cycle

    if isinstance(series, UniformSeries):
        ts = series.timestamps_ms()
        present = np.isfinite(series.values)
    else:
        ts = series.timestamps_ms
        present = np.ones(len(ts), dtype=bool)

    days = (ts + day_offset_ms) // MS_PER_DAY
    report = CoverageReport(threshold=threshold)
    retained_mask = np.zeros(len(ts), dtype=bool)
    for day, count in sorted(_per_day_presence(days, present).items()):
        coverage = count / expected
        retained = coverage >= threshold
        report.days.append(CoverageDay(day=_day_label(day), expected_samples=expected,
                                       present_samples=count, coverage=coverage,
                                       retained=retained))
        if retained:
            retained_mask |= days == day

    if isinstance(series, UniformSeries):
        values = series.values.copy()
        values[~retained_mask] = np.nan
        filtered = UniformSeries(start_ms=series.start_ms, rate_hz=series.rate_hz,
                                 values=values, unit=series.unit,
                                 plant_id=series.plant_id, channel=series.channel)
    else:
        filtered = RawTrace(plant_id=series.plant_id, channel=series.channel,
                            timestamps_ms=series.timestamps_ms[retained_mask],
                            potential_mv=series.potential_mv[retained_mask],
                            duplicate_warnings=series.duplicate_warnings)
    return filtered, report
