"""Binary environment labels from threshold rules and 1-h window extraction.

A value strictly above the rule threshold maps to the positive class
(Day/Rain/Warm/Windy); ties go to the negative class.  Windows are emitted
only for hours where every environmental reading agrees (purity rule).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MissingValue
from .ingest import EnvSeries
from .preprocess import UniformSeries

MS_PER_HOUR = 3_600_000
WINDOW_SECONDS = 3600
DAYTIME_RESTRICTION = (8, 20)  # [08:00, 20:00) start hours, local-config time


@dataclass(frozen=True)
class LabelRule:
    task: str
    feature: str  # EnvSeries field name
    threshold: float
    positive_class: str
    negative_class: str
    time_restriction: tuple[int, int] | None = None  # daily [start, end) hours


STANDARD_RULES: dict[str, LabelRule] = {
    "day_night": LabelRule("day_night", "solar_irradiance", 50.0, "Day", "Night"),
    "rain_dry": LabelRule("rain_dry", "precipitation", 0.0, "Rain", "Dry"),
    "warm_cold": LabelRule("warm_cold", "air_temp", 25.0, "Warm", "Cold",
                           time_restriction=DAYTIME_RESTRICTION),
    "windy_calm": LabelRule("windy_calm", "wind_speed", 1.25, "Windy", "Calm",
                            time_restriction=DAYTIME_RESTRICTION),
}


@dataclass
class LabeledWindow:
    plant_id: str
    channel: str
    start_ms: int
    task: str
    label: str
    values: np.ndarray  # exactly 3600 samples at 1 Hz


@dataclass
class SkipReport:
    """Tally of hours rejected per reason while windowing one series."""

    outside_restriction: int = 0
    incomplete_signal: int = 0
    missing_env: int = 0
    impure_env: int = 0
    emitted: int = 0

    def to_dict(self) -> dict[str, int]:
        return dict(self.__dict__)


def classify_env_sample(rule: LabelRule, value: float) -> str:
    """Label one reading: strictly above threshold is the positive class."""
    if value is None or (isinstance(value, float) and np.isnan(value)):
        raise MissingValue(f"{rule.feature} missing")
    return rule.positive_class if value > rule.threshold else rule.negative_class


def _hour_labels(rule: LabelRule, env: EnvSeries, start_ms: int, end_ms: int,
                 expected_count: int, mode: str) -> str | None:
    """Label for one hour, or None when the hour cannot be certified."""
    lo = int(np.searchsorted(env.timestamps_ms, start_ms, side="left"))
    hi = int(np.searchsorted(env.timestamps_ms, end_ms, side="left"))
    values = env.fields[rule.feature][lo:hi]
    if hi - lo != expected_count or np.isnan(values).any():
        return None  # missing readings: purity cannot be certified
    positive = values > rule.threshold
    if mode == "purity":
        if positive.all():
            return rule.positive_class
        if (~positive).all():
            return rule.negative_class
        return ""  # mixed hour
    n_pos = int(positive.sum())
    if 2 * n_pos == len(values):
        return ""  # majority tie
    return rule.positive_class if 2 * n_pos > len(values) else rule.negative_class


def extract_windows(series: UniformSeries, env: EnvSeries, rule: LabelRule,
                    env_rate_hz: float = 0.1, utc_offset_hours: int = 0,
                    mode: str = "purity") -> tuple[list[LabeledWindow], SkipReport]:
    """Cut hour-aligned windows whose environment certifies a single class.

    A window needs (a) the full nominal count of env readings in the hour,
    none missing and all yielding the same label, (b) a start hour inside the
    rule's daily restriction if any (evaluated at UTC+``utc_offset_hours``),
    and (c) all 3600 signal samples present.
    """
    if series.rate_hz != 1.0:
        raise ValueError("windowing expects a 1 Hz series")
    if mode not in ("purity", "majority"):
        raise ValueError(f"unknown mode {mode!r}")
    expected_env = int(round(WINDOW_SECONDS * env_rate_hz))

    report = SkipReport()
    windows: list[LabeledWindow] = []
    ts = series.timestamps_ms()
    first_hour = -(-int(ts[0]) // MS_PER_HOUR)  # ceil: first fully covered hour
    last_hour = (int(ts[-1]) + series.step_ms) // MS_PER_HOUR  # end-exclusive
    for hour in range(first_hour, last_hour):
        start_ms = hour * MS_PER_HOUR
        if rule.time_restriction is not None:
            hour_of_day = (hour + utc_offset_hours) % 24
            lo, hi = rule.time_restriction
            if not (lo <= hour_of_day < hi):
                report.outside_restriction += 1
                continue
        offset = (start_ms - series.start_ms) // series.step_ms
        segment = series.values[offset:offset + WINDOW_SECONDS]
        if len(segment) < WINDOW_SECONDS or not np.isfinite(segment).all():
            report.incomplete_signal += 1
            continue
        label = _hour_labels(rule, env, start_ms, start_ms + MS_PER_HOUR,
                             expected_env, mode)
        if label is None:
            report.missing_env += 1
            continue
        if label == "":
            report.impure_env += 1
            continue
        windows.append(LabeledWindow(plant_id=series.plant_id, channel=series.channel,
                                     start_ms=start_ms, task=rule.task, label=label,
                                     values=segment.copy()))
        report.emitted += 1
    return windows, report


def write_windows_csv(windows: list[LabeledWindow], path: str | Path) -> None:
    """One CSV per task: ``plant_id,channel,start_ms,label,v0,...,v3599``."""
    header = ["plant_id", "channel", "start_ms", "label"]
    header += [f"v{i}" for i in range(WINDOW_SECONDS)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for w in windows:
            row = [w.plant_id, w.channel, w.start_ms, w.label]
            row.extend(repr(v) for v in w.values.tolist())
            writer.writerow(row)


def read_windows_csv(path: str | Path, task: str) -> list[LabeledWindow]:
    windows: list[LabeledWindow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            values = np.array([float(v) for v in row[4:]])
            windows.append(LabeledWindow(plant_id=row[0], channel=row[1],
                                         start_ms=int(row[2]), task=task,
                                         label=row[3], values=values))
    return windows


def write_skip_report(reports: dict[str, SkipReport], path: str | Path) -> None:
    Path(path).write_text(json.dumps({k: r.to_dict() for k, r in reports.items()},
                                     indent=2))
