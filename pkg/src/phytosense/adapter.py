"""Adapter converting an externally published dataset into the native formats.

The published archive's column layout is not fixed here; it is supplied as a
mapping JSON so the adapter stays correct against whatever layout the
download carries:

    {
      "traces": [
        {"path": "stemA.csv", "plant_id": "A", "channel": "stem",
         "timestamp_col": "time", "value_col": "potential",
         "timestamp_unit": "s"}
      ],
      "env": {
        "path": "weather.csv", "timestamp_col": "time",
        "timestamp_unit": "s",
        "columns": {"wind_speed": "wind", "air_temp": "temperature", ...}
      }
    }

``timestamp_unit`` is one of ``ms``, ``s``, or ``iso``.  Unmapped env
columns are written as missing.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConfigError
from .ingest import ENV_FIELDS, ENV_HEADER, TRACE_HEADER


def _to_epoch_ms(values: pd.Series, unit: str) -> np.ndarray:
    if unit == "ms":
        return values.astype(np.int64).to_numpy()
    if unit == "s":
        return (values.astype(float) * 1000).round().astype(np.int64).to_numpy()
    if unit == "iso":
        parsed = pd.to_datetime(values, utc=True)
        return (parsed.astype(np.int64) // 1_000_000).to_numpy()
    raise ConfigError(f"unknown timestamp_unit {unit!r}")


def adapt_external_dataset(mapping_path: str | Path, out_dir: str | Path) -> dict:
    """Convert mapped external CSVs into native trace/env CSVs."""
    mapping_path = Path(mapping_path)
    if not mapping_path.exists():
        raise ConfigError(f"mapping file not found: {mapping_path}")
    mapping = json.loads(mapping_path.read_text())
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    root = mapping_path.parent

    trace_paths = []
    for entry in mapping.get("traces", []):
        src = root / entry["path"]
        if not src.exists():
            raise ConfigError(f"trace file not found: {src}")
        df = pd.read_csv(src)
        frame = pd.DataFrame({
            "timestamp_ms": _to_epoch_ms(df[entry["timestamp_col"]],
                                         entry.get("timestamp_unit", "ms")),
            "potential_mv": df[entry["value_col"]].astype(float),
            "plant_id": entry["plant_id"],
            "channel": entry["channel"],
        })[TRACE_HEADER]
        frame = frame.sort_values("timestamp_ms", kind="stable")
        dest = out_dir / f"trace_{entry['plant_id']}_{entry['channel']}.csv"
        frame.to_csv(dest, index=False)
        trace_paths.append(str(dest))

    env_path = None
    if "env" in mapping:
        entry = mapping["env"]
        src = root / entry["path"]
        if not src.exists():
            raise ConfigError(f"env file not found: {src}")
        df = pd.read_csv(src)
        out = pd.DataFrame({"timestamp_ms": _to_epoch_ms(
            df[entry["timestamp_col"]], entry.get("timestamp_unit", "ms"))})
        columns = entry.get("columns", {})
        for name in ENV_FIELDS:
            source = columns.get(name)
            out[name] = df[source].astype(float) if source in df.columns else np.nan
        out = out[ENV_HEADER].sort_values("timestamp_ms", kind="stable")
        env_path = str(out_dir / "env.csv")
        out.to_csv(env_path, index=False)

    summary = {"trace_paths": trace_paths, "env_path": env_path}
    (out_dir / "adapter_manifest.json").write_text(json.dumps(summary, indent=2))
    return summary
