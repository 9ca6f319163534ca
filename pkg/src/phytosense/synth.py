"""Synthetic trace/environment generator for desk-scale verification.

The generator is schedule-driven: it first fixes which hours of each day are
day/night, warm, windy, and rainy (hour quotas rounded from the target class
ratios, so achieved ratios land within a fraction of an hour of the
targets), then synthesizes environment curves consistent with that schedule
and injects one documented signature per condition into a 1/f-noise
electrical-potential trace:

* day    -- level offset plus extra sample noise
* rain   -- transient spikes with exponential decay
* warm   -- slow drift bump across the hour
* wind   -- band-limited 0.08 Hz oscillation

Curves cross their class thresholds between environment samples (or inside
a dedicated twilight ramp hour), so labeled hours are unanimous under the
purity rule.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .ingest import ENV_HEADER, MS_PER_DAY

HOURS_PER_DAY = 24
DAY_HOURS = tuple(range(7, 16))  # pure daylight; hour 6 is the twilight ramp
TWILIGHT_HOUR = 6
RESTRICTED_HOURS = tuple(range(8, 20))
START_EPOCH_DAY = 19_905  # 2024-07-01 UTC, midnight-aligned


@dataclass(frozen=True)
class SynthSpec:
    days: int = 4
    plants: int = 2
    native_rate_hz: float = 5.0
    strength_day: float = 1.0
    strength_rain: float = 1.0
    strength_warm: float = 1.0
    strength_wind: float = 1.0
    noise_mv: float = 2.0
    baseline_mv: float = -50.0
    target_night: float = 0.61
    target_cold: float = 0.794
    target_dry: float = 0.959
    target_calm: float = 0.936

    def targets(self) -> dict[str, float]:
        return {"night": self.target_night, "cold": self.target_cold,
                "dry": self.target_dry, "calm": self.target_calm}


@dataclass
class Schedule:
    """Absolute-hour index sets over the whole run."""

    days: int
    day_hours: set[int] = field(default_factory=set)
    twilight_hours: set[int] = field(default_factory=set)
    warm_hours: set[int] = field(default_factory=set)
    windy_hours: set[int] = field(default_factory=set)
    rain_hours: set[int] = field(default_factory=set)

    def counts(self) -> dict[str, int]:
        total = self.days * HOURS_PER_DAY
        restricted = self.days * len(RESTRICTED_HOURS)
        return {
            "day": len(self.day_hours),
            "night": total - len(self.day_hours) - len(self.twilight_hours),
            "warm": len(self.warm_hours),
            "cold": restricted - len(self.warm_hours),
            "windy": len(self.windy_hours),
            "calm": restricted - len(self.windy_hours),
            "rain": len(self.rain_hours),
            "dry": total - len(self.rain_hours),
        }


def build_schedule(spec: SynthSpec, seed: int) -> Schedule:
    rng = np.random.default_rng([seed, 0])
    schedule = Schedule(days=spec.days)
    for day in range(spec.days):
        base = day * HOURS_PER_DAY
        schedule.day_hours.update(base + h for h in DAY_HOURS)
        schedule.twilight_hours.add(base + TWILIGHT_HOUR)

    # warm afternoons: contiguous blocks ending inside the restriction
    warm_quota = int(round((1.0 - spec.target_cold)
                           * len(RESTRICTED_HOURS) * spec.days))
    per_day = np.full(spec.days, warm_quota // spec.days)
    per_day[: warm_quota % spec.days] += 1
    for day, width in enumerate(per_day):
        start = min(13, RESTRICTED_HOURS[-1] + 1 - int(width))
        for h in range(start, start + int(width)):
            schedule.warm_hours.add(day * HOURS_PER_DAY + h)

    windy_quota = int(round((1.0 - spec.target_calm)
                            * len(RESTRICTED_HOURS) * spec.days))
    restricted_slots = [day * HOURS_PER_DAY + h
                        for day in range(spec.days) for h in RESTRICTED_HOURS]
    picks = rng.choice(len(restricted_slots), size=windy_quota, replace=False)
    schedule.windy_hours.update(restricted_slots[i] for i in sorted(picks))

    rain_quota = int(round((1.0 - spec.target_dry) * HOURS_PER_DAY * spec.days))
    all_slots = spec.days * HOURS_PER_DAY
    picks = rng.choice(all_slots, size=rain_quota, replace=False)
    schedule.rain_hours.update(int(i) for i in sorted(picks))
    return schedule


# ---------------------------------------------------------------------------
# environment synthesis (10 s cadence)
# ---------------------------------------------------------------------------

def synth_env_frame(spec: SynthSpec, schedule: Schedule) -> pd.DataFrame:
    seconds = np.arange(0, spec.days * 86_400, 10, dtype=np.int64)
    hours = seconds // 3600
    hour_of_day = (seconds // 3600) % HOURS_PER_DAY
    second_of_day = seconds % 86_400
    t_day = second_of_day / 86_400.0

    is_day = np.isin(hours, list(schedule.day_hours))
    is_twilight = np.isin(hours, list(schedule.twilight_hours))
    is_warm = np.isin(hours, list(schedule.warm_hours))
    is_windy = np.isin(hours, list(schedule.windy_hours))
    is_rain = np.isin(hours, list(schedule.rain_hours))

    irradiance = 2.0 + 1.5 * np.abs(np.sin(2 * np.pi * t_day))
    day_phase = np.clip((second_of_day - 7 * 3600) / (9 * 3600.0), 0.0, 1.0)
    irradiance[is_day] = (60.0 + 740.0 * np.sin(np.pi * day_phase[is_day]))
    ramp = (second_of_day - TWILIGHT_HOUR * 3600) / 3600.0
    irradiance[is_twilight] = 2.0 + 58.0 * ramp[is_twilight]

    air_temp = 12.0 + 6.0 * np.sin(2 * np.pi * (second_of_day - 9 * 3600) / 86_400.0)
    hour_frac = (second_of_day % 3600) / 3600.0
    air_temp[is_warm] = 27.0 + 1.5 * np.sin(np.pi * hour_frac[is_warm])

    wind_speed = 0.3 + 0.5 * np.abs(np.sin(2 * np.pi * 3 * t_day))
    wind_speed[is_windy] = 1.8 + 0.9 * np.abs(np.sin(2 * np.pi * 6 * hour_frac[is_windy]))
    wind_dir = (180.0 + 120.0 * np.sin(2 * np.pi * t_day)) % 360.0

    precipitation = np.zeros(len(seconds))
    precipitation[is_rain] = 0.15 + 0.45 * np.abs(
        np.sin(2 * np.pi * 5 * hour_frac[is_rain]))

    rel_humidity = np.clip(78.0 - 1.6 * (air_temp - 12.0)
                           + 6.0 * np.sin(2 * np.pi * t_day + 1.0), 20.0, 100.0)
    dew_point = air_temp - (100.0 - rel_humidity) / 5.0

    timestamps = (START_EPOCH_DAY * MS_PER_DAY + seconds * 1000).astype(np.int64)
    return pd.DataFrame({
        "timestamp_ms": timestamps,
        "wind_speed": wind_speed,
        "wind_dir": wind_dir,
        "air_temp": air_temp,
        "rel_humidity": rel_humidity,
        "solar_irradiance": irradiance,
        "precipitation": precipitation,
        "dew_point": dew_point,
    })[ENV_HEADER]


# ---------------------------------------------------------------------------
# trace synthesis (native rate)
# ---------------------------------------------------------------------------

def _pink_noise(n: int, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance noise with ~1/f power shaping."""
    white = rng.normal(size=n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n)
    spectrum[0] = 0.0
    spectrum[1:] /= np.sqrt(freqs[1:] / freqs[1])
    x = np.fft.irfft(spectrum, n)
    std = x.std()
    return x / std if std > 0 else x


def synth_trace_values(spec: SynthSpec, schedule: Schedule, plant_index: int,
                       seed: int) -> tuple[np.ndarray, np.ndarray]:
    """(timestamps_ms, potential_mv) for one plant across the whole run."""
    rate = spec.native_rate_hz
    step_ms = int(round(1000 / rate))
    per_day = int(round(86_400 * rate))
    n = per_day * spec.days
    values = np.empty(n)
    plant_offset = 4.0 * plant_index

    for day in range(spec.days):
        rng = np.random.default_rng([seed, 1, plant_index, day])
        sl = slice(day * per_day, (day + 1) * per_day)
        values[sl] = spec.baseline_mv + plant_offset + \
            spec.noise_mv * _pink_noise(per_day, rng)

        t_sec = np.arange(per_day) / rate  # seconds within the day
        hour_of_day = (t_sec // 3600).astype(int)
        for hour in range(HOURS_PER_DAY):
            abs_hour = day * HOURS_PER_DAY + hour
            mask = hour_of_day == hour
            frac = (t_sec[mask] % 3600) / 3600.0
            if abs_hour in schedule.day_hours and spec.strength_day > 0:
                values[sl][mask] += spec.strength_day * (
                    8.0 + 3.0 * rng.normal(size=mask.sum()))
            if abs_hour in schedule.warm_hours and spec.strength_warm > 0:
                values[sl][mask] += spec.strength_warm * 6.0 * np.sin(np.pi * frac)
            if abs_hour in schedule.windy_hours and spec.strength_wind > 0:
                phase = rng.uniform(0, 2 * np.pi)
                values[sl][mask] += spec.strength_wind * 5.0 * np.sin(
                    2 * np.pi * 0.08 * t_sec[mask] + phase)
            if abs_hour in schedule.rain_hours and spec.strength_rain > 0:
                n_spikes = int(rng.integers(12, 25))
                starts = np.sort(rng.uniform(0, 3600, n_spikes))
                amplitudes = spec.strength_rain * 25.0 * rng.uniform(0.7, 1.3, n_spikes)
                local_t = t_sec[mask] - hour * 3600.0
                pulse = np.zeros(mask.sum())
                for s, a in zip(starts, amplitudes):
                    after = local_t >= s
                    pulse[after] += a * np.exp(-(local_t[after] - s) / 2.0)
                values[sl][mask] += pulse

    timestamps = (START_EPOCH_DAY * MS_PER_DAY
                  + np.arange(n, dtype=np.int64) * step_ms)
    return timestamps, values


def generate_synthetic(spec: SynthSpec, seed: int, out_dir: str | Path) -> dict:
    """Write trace CSVs (one per plant, alternating stem/leaf) and the env CSV.

    Returns a manifest dict with file paths, the hour-count schedule, and the
    configured ratio targets.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    schedule = build_schedule(spec, seed)

    env = synth_env_frame(spec, schedule)
    env_path = out_dir / "env.csv"
    env.to_csv(env_path, index=False, float_format="%.6f")

    trace_paths = []
    for p in range(spec.plants):
        channel = "stem" if p % 2 == 0 else "leaf"
        plant_id = f"plant{p:02d}"
        timestamps, values = synth_trace_values(spec, schedule, p, seed)
        frame = pd.DataFrame({
            "timestamp_ms": timestamps,
            "potential_mv": values,
            "plant_id": plant_id,
            "channel": channel,
        })
        path = out_dir / f"trace_{plant_id}_{channel}.csv"
        frame.to_csv(path, index=False, float_format="%.6f")
        trace_paths.append(str(path))

    manifest = {
        "env_path": str(env_path),
        "trace_paths": trace_paths,
        "seed": seed,
        "days": spec.days,
        "plants": spec.plants,
        "native_rate_hz": spec.native_rate_hz,
        "strengths": {"day": spec.strength_day, "rain": spec.strength_rain,
                      "warm": spec.strength_warm, "wind": spec.strength_wind},
        "ratio_targets": spec.targets(),
        "schedule_counts": schedule.counts(),
    }
    (out_dir / "synth_manifest.json").write_text(json.dumps(manifest, indent=2))
    return manifest
