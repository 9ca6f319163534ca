"""Downsampling to 1 Hz, gap interpolation, and z-score normalization.

Stage order over a raw trace is: mean-filter downsample, daily coverage
filter, per-day-run interpolation, then optional z-scoring.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateSeries, TooSparse
from .ingest import MS_PER_DAY, CoverageReport, RawTrace

UNIT_MILLIVOLT = "millivolt"
UNIT_ZSCORE = "zscore"


@dataclass
class UniformSeries:
    """Regular grid of values; NaN marks a missing slot (never a sentinel)."""

    start_ms: int
    rate_hz: float
    values: np.ndarray  # float64, NaN = missing
    unit: str = UNIT_MILLIVOLT
    plant_id: str = ""
    channel: str = ""

    def __len__(self) -> int:
        return len(self.values)

    @property
    def step_ms(self) -> int:
        return int(round(1000 / self.rate_hz))

    def timestamps_ms(self) -> np.ndarray:
        return self.start_ms + np.arange(len(self.values), dtype=np.int64) * self.step_ms


@dataclass(frozen=True)
class ZScoreParams:
    mu: float
    sigma: float  # population convention (divide by N)


def downsample_mean(trace: RawTrace, target_rate_hz: float = 1.0) -> UniformSeries:
    """Mean-filter a raw trace into bins aligned to wall-clock seconds (UTC).

    The output value for bin t is the arithmetic mean of every raw sample
    with timestamp in [t, t+1/rate); bins with no samples are NaN.
    """
    if len(trace) == 0:
        raise ValueError("trace is empty")
    step_ms = 1000 / target_rate_hz
    if abs(step_ms - round(step_ms)) > 1e-9:
        raise ValueError("target rate must divide 1000 ms evenly")
    step_ms = int(round(step_ms))

    bins = trace.timestamps_ms // step_ms
    first, last = int(bins[0]), int(bins[-1])
    n = last - first + 1
    idx = (bins - first).astype(np.intp)
    sums = np.bincount(idx, weights=trace.potential_mv, minlength=n)
    counts = np.bincount(idx, minlength=n)
    values = np.full(n, np.nan)
    nonzero = counts > 0
    values[nonzero] = sums[nonzero] / counts[nonzero]
    return UniformSeries(start_ms=first * step_ms, rate_hz=target_rate_hz,
                         values=values, unit=UNIT_MILLIVOLT,
                         plant_id=trace.plant_id, channel=trace.channel)


def interpolate_time(series: UniformSeries) -> UniformSeries:
    """Fill missing slots linearly between present neighbours.

    Interior gaps take the two-point line between the nearest present values,
    weighted by timestamp distance; leading/trailing gaps extend the nearest
    present value flat.
    """
    present = np.flatnonzero(np.isfinite(series.values))
    if len(present) < 2:
        raise TooSparse(f"{len(present)} present values, need >= 2")
    if len(present) == len(series.values):
        return UniformSeries(series.start_ms, series.rate_hz, series.values.copy(),
                             series.unit, series.plant_id, series.channel)
    # the grid is uniform, so index distance is proportional to time distance
    filled = np.interp(np.arange(len(series.values)), present, series.values[present])
    return UniformSeries(series.start_ms, series.rate_hz, filled,
                         series.unit, series.plant_id, series.channel)


def interpolate_within_retained_days(series: UniformSeries, report: CoverageReport,
                                     day_offset_ms: int = 0) -> UniformSeries:
    """Interpolate each contiguous run of retained days independently.

    Excluded days stay NaN; runs are never bridged across an excluded day, so
    no value is fabricated inside a dropped day.
    """
    retained = report.retained_days()
    ts = series.timestamps_ms()
    days = (ts + day_offset_ms) // MS_PER_DAY
    from .ingest import _day_label

    keep = np.array([_day_label(int(d)) in retained for d in np.unique(days)])
    unique_days = np.unique(days)
    values = series.values.copy()
    run: list[int] = []
    runs: list[list[int]] = []
    for i, day in enumerate(unique_days):
        if keep[i]:
            run.append(int(day))
        elif run:
            runs.append(run)
            run = []
    if run:
        runs.append(run)
    for run_days in runs:
        mask = np.isin(days, run_days)
        segment = UniformSeries(series.start_ms, series.rate_hz, values[mask], series.unit)
        try:
            values[mask] = interpolate_time(segment).values
        except TooSparse:
            pass  # a run with <2 present values stays missing
    return UniformSeries(series.start_ms, series.rate_hz, values,
                         series.unit, series.plant_id, series.channel)


def zscore(series: UniformSeries) -> tuple[UniformSeries, ZScoreParams]:
    """Normalize to mean 0 / std 1 using the population convention."""
    values = series.values
    if len(values) < 2:
        raise ValueError("series too short to normalize")
    finite = values[np.isfinite(values)]
    mu = float(np.mean(finite))
    sigma = float(np.std(finite))
    if sigma == 0.0:
        raise DegenerateSeries("constant series (dead electrode?)")
    out = (values - mu) / sigma
    return (UniformSeries(series.start_ms, series.rate_hz, out, UNIT_ZSCORE,
                          series.plant_id, series.channel),
            ZScoreParams(mu=mu, sigma=sigma))


def denormalize(series: UniformSeries, params: ZScoreParams) -> UniformSeries:
    values = series.values * params.sigma + params.mu
    return UniformSeries(series.start_ms, series.rate_hz, values, UNIT_MILLIVOLT,
                         series.plant_id, series.channel)


def write_series_csv(series: UniformSeries, path: str | Path,
                     params: ZScoreParams | None = None) -> None:
    """Write present slots as ``timestamp_ms,value`` plus a JSON sidecar."""
    path = Path(path)
    ts = series.timestamps_ms()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp_ms", "value"])
        for t, v in zip(ts.tolist(), series.values.tolist()):
            if not np.isnan(v):
                writer.writerow([t, repr(v)])
    sidecar = {
        "start_ms": int(series.start_ms),
        "rate_hz": series.rate_hz,
        "n_slots": len(series),
        "unit": series.unit,
        "plant_id": series.plant_id,
        "channel": series.channel,
        "zscore": None if params is None else {"mu": params.mu, "sigma": params.sigma},
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))


def read_series_csv(path: str | Path) -> tuple[UniformSeries, ZScoreParams | None]:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    values = np.full(sidecar["n_slots"], np.nan)
    step_ms = int(round(1000 / sidecar["rate_hz"]))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            idx = (int(row[0]) - sidecar["start_ms"]) // step_ms
            values[idx] = float(row[1])
    series = UniformSeries(start_ms=sidecar["start_ms"], rate_hz=sidecar["rate_hz"],
                           values=values, unit=sidecar["unit"],
                           plant_id=sidecar["plant_id"], channel=sidecar["channel"])
    zs = sidecar.get("zscore")
    params = ZScoreParams(mu=zs["mu"], sigma=zs["sigma"]) if zs else None
    return series, params
