"""Statistical feature catalog over 1-h windows and min-max normalization.

Catalog v1 holds 50 named features, each a pure function of one window's
3600 values.  Features whose definition is undefined on an input (skewness
of a constant window, autocorrelation with zero variance, ...) yield 0 and
set an imputation flag so the matrix stays finite and rectangular.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .labeling import LabeledWindow

CATALOG_VERSION = "v1"


# ---------------------------------------------------------------------------
# feature functions (may return NaN/inf; the catalog layer imputes)
# ---------------------------------------------------------------------------

def _moments(x: np.ndarray) -> tuple[float, float]:
    mu = float(np.mean(x))
    var = float(np.mean((x - mu) ** 2))
    return mu, var


def _skewness(x: np.ndarray) -> float:
    mu, var = _moments(x)
    if var == 0.0:
        return np.nan
    return float(np.mean((x - mu) ** 3) / var ** 1.5)


def _kurtosis(x: np.ndarray) -> float:
    # excess kurtosis, population convention
    mu, var = _moments(x)
    if var == 0.0:
        return np.nan
    return float(np.mean((x - mu) ** 4) / var ** 2 - 3.0)


def _mean_second_derivative(x: np.ndarray) -> float:
    if len(x) < 3:
        return np.nan
    return float(np.mean((x[2:] - 2 * x[1:-1] + x[:-2]) / 2.0))


def _zero_crossings(x: np.ndarray) -> float:
    signs = np.sign(x - np.mean(x))
    signs = signs[signs != 0]
    if len(signs) < 2:
        return 0.0
    return float(np.sum(signs[1:] != signs[:-1]))


def _longest_strike(mask: np.ndarray) -> float:
    best = run = 0
    for hit in mask:
        run = run + 1 if hit else 0
        best = max(best, run)
    return float(best)


def _number_of_peaks(x: np.ndarray, support: int = 5) -> float:
    n = len(x)
    if n < 2 * support + 1:
        return 0.0
    count = 0
    for i in range(support, n - support):
        window = x[i - support:i + support + 1]
        centre = x[i]
        if centre > np.max(window[:support]) and centre > np.max(window[support + 1:]):
            count += 1
    return float(count)


def _autocorrelation(x: np.ndarray, lag: int) -> float:
    n = len(x)
    if lag >= n:
        return np.nan
    mu, var = _moments(x)
    if var == 0.0:
        return np.nan
    return float(np.mean((x[:n - lag] - mu) * (x[lag:] - mu)) / var)


def _half_sums_ratio(x: np.ndarray) -> float:
    half = len(x) // 2
    s2 = float(np.sum(x[half:]))
    if s2 == 0.0:
        return np.nan
    return float(np.sum(x[:half])) / s2


def _linear_trend(x: np.ndarray) -> tuple[float, float, float]:
    t = np.arange(len(x), dtype=float)
    t_mu = t.mean()
    x_mu = x.mean()
    t_var = float(np.mean((t - t_mu) ** 2))
    cov = float(np.mean((t - t_mu) * (x - x_mu)))
    slope = cov / t_var
    intercept = x_mu - slope * t_mu
    ss_tot = float(np.sum((x - x_mu) ** 2))
    if ss_tot == 0.0:
        return slope, intercept, np.nan
    ss_res = float(np.sum((x - (intercept + slope * t)) ** 2))
    return slope, intercept, 1.0 - ss_res / ss_tot


def _binned_entropy(x: np.ndarray, bins: int = 10) -> float:
    lo, hi = float(np.min(x)), float(np.max(x))
    if lo == hi:
        return 0.0
    counts, _ = np.histogram(x, bins=bins, range=(lo, hi))
    p = counts[counts > 0] / len(x)
    return float(-np.sum(p * np.log(p)))


def _cid_ce(x: np.ndarray, normalize: bool) -> float:
    if normalize:
        mu, var = _moments(x)
        if var == 0.0:
            return np.nan
        x = (x - mu) / np.sqrt(var)
    return float(np.sqrt(np.sum(np.diff(x) ** 2)))


def _periodogram(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    power = np.abs(np.fft.rfft(x)) ** 2
    freqs = np.fft.rfftfreq(len(x), d=1.0)
    return freqs[1:], power[1:]  # DC excluded


def _spectral_centroid(x: np.ndarray) -> float:
    freqs, power = _periodogram(x)
    total = float(np.sum(power))
    if total == 0.0:
        return np.nan
    return float(np.sum(freqs * power) / total)


def _spectral_variance(x: np.ndarray) -> float:
    freqs, power = _periodogram(x)
    total = float(np.sum(power))
    if total == 0.0:
        return np.nan
    centroid = float(np.sum(freqs * power) / total)
    return float(np.sum((freqs - centroid) ** 2 * power) / total)


def _band_power(x: np.ndarray, band: int) -> float:
    """Fraction of periodogram power in one of three log-spaced bands."""
    freqs, power = _periodogram(x)
    total = float(np.sum(power))
    if total == 0.0 or len(freqs) < 3:
        return np.nan
    edges = np.logspace(np.log10(freqs[0]), np.log10(freqs[-1]), 4)
    lo, hi = edges[band], edges[band + 1]
    if band == 0:
        mask = (freqs >= lo) & (freqs <= hi)
    else:
        mask = (freqs > lo) & (freqs <= hi)
    return float(np.sum(power[mask]) / total)


def _ratio_beyond_sigma(x: np.ndarray, r: float) -> float:
    mu, var = _moments(x)
    return float(np.mean(np.abs(x - mu) > r * np.sqrt(var)))


def _quantile(x: np.ndarray, q: float) -> float:
    return float(np.quantile(x, q))


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeatureCatalog:
    """Ordered, versioned registry of named window features."""

    version: str
    entries: tuple[tuple[str, Callable[[np.ndarray], float]], ...]

    @property
    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


def _build_catalog_v1() -> FeatureCatalog:
    entries: list[tuple[str, Callable[[np.ndarray], float]]] = [
        ("mean", lambda x: float(np.mean(x))),
        ("variance", lambda x: _moments(x)[1]),
        ("std_dev", lambda x: float(np.sqrt(_moments(x)[1]))),
        ("skewness", _skewness),
        ("kurtosis", _kurtosis),
        ("minimum", lambda x: float(np.min(x))),
        ("maximum", lambda x: float(np.max(x))),
        ("median", lambda x: float(np.median(x))),
    ]
    for q in (0.05, 0.10, 0.25, 0.75, 0.90, 0.95):
        entries.append((f"quantile_{int(q * 100):02d}", lambda x, q=q: _quantile(x, q)))
    entries += [
        ("value_range", lambda x: float(np.max(x) - np.min(x))),
        ("rms", lambda x: float(np.sqrt(np.mean(x ** 2)))),
        ("abs_energy", lambda x: float(np.sum(x ** 2))),
        ("mean_abs_change", lambda x: float(np.mean(np.abs(np.diff(x))))),
        ("mean_change", lambda x: float(np.mean(np.diff(x)))),
        ("mean_second_derivative", _mean_second_derivative),
        ("zero_crossings", _zero_crossings),
        ("count_above_mean", lambda x: float(np.sum(x > np.mean(x)))),
        ("count_below_mean", lambda x: float(np.sum(x < np.mean(x)))),
        ("longest_strike_above_mean", lambda x: _longest_strike(x > np.mean(x))),
        ("longest_strike_below_mean", lambda x: _longest_strike(x < np.mean(x))),
        ("peak_count", _number_of_peaks),
    ]
    for lag in (1, 10, 60, 300, 900):
        entries.append((f"autocorr_lag_{lag}", lambda x, lag=lag: _autocorrelation(x, lag)))
    entries += [
        ("half_sums_ratio", _half_sums_ratio),
        ("trend_slope", lambda x: _linear_trend(x)[0]),
        ("trend_intercept", lambda x: _linear_trend(x)[1]),
        ("trend_r2", lambda x: _linear_trend(x)[2]),
        ("binned_entropy", _binned_entropy),
        ("cid_ce_normalized", lambda x: _cid_ce(x, True)),
        ("cid_ce_raw", lambda x: _cid_ce(x, False)),
        ("spectral_centroid", _spectral_centroid),
        ("spectral_variance", _spectral_variance),
        ("band_power_low", lambda x: _band_power(x, 0)),
        ("band_power_mid", lambda x: _band_power(x, 1)),
        ("band_power_high", lambda x: _band_power(x, 2)),
        ("first_value", lambda x: float(x[0])),
        ("last_value", lambda x: float(x[-1])),
        ("abs_sum_of_changes", lambda x: float(np.sum(np.abs(np.diff(x))))),
        ("ratio_beyond_1_sigma", lambda x: _ratio_beyond_sigma(x, 1.0)),
        ("ratio_beyond_2_sigma", lambda x: _ratio_beyond_sigma(x, 2.0)),
        ("argmax_fraction", lambda x: float(np.argmax(x)) / len(x)),
        ("argmin_fraction", lambda x: float(np.argmin(x)) / len(x)),
    ]
    return FeatureCatalog(version=CATALOG_VERSION, entries=tuple(entries))


CATALOG_V1 = _build_catalog_v1()

_CATALOGS = {CATALOG_VERSION: CATALOG_V1}


def get_catalog(version: str = CATALOG_VERSION) -> FeatureCatalog:
    try:
        return _CATALOGS[version]
    except KeyError:
        raise KeyError(f"unknown catalog version {version!r}") from None


def compute_features(values: np.ndarray,
                     catalog: FeatureCatalog = CATALOG_V1) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate every catalog entry on one window.

    Returns ``(row, imputed)`` where non-finite results were replaced by 0
    and flagged in the boolean ``imputed`` mask.
    """
    x = np.asarray(values, dtype=float)
    row = np.empty(len(catalog))
    for j, (_, fn) in enumerate(catalog.entries):
        row[j] = fn(x)
    imputed = ~np.isfinite(row)
    row[imputed] = 0.0
    return row, imputed


# ---------------------------------------------------------------------------
# feature matrix
# ---------------------------------------------------------------------------

@dataclass
class FeatureMatrix:
    """Rows of catalog features with labels and per-row provenance."""

    features: np.ndarray  # (n, d) float64, finite
    labels: np.ndarray  # (n,) object/str
    feature_names: list[str]
    provenance: list[tuple[str, str, int]]  # (plant_id, channel, start_ms)
    catalog_version: str = CATALOG_VERSION
    imputed: np.ndarray | None = None  # (n, d) bool

    def __post_init__(self):
        if self.features.shape[1] != len(self.feature_names):
            raise ValueError("column count does not match feature names")
        if self.features.shape[0] != len(self.labels):
            raise ValueError("row count does not match labels")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


def build_feature_matrix(windows: list[LabeledWindow],
                         catalog: FeatureCatalog = CATALOG_V1) -> FeatureMatrix:
    rows = np.empty((len(windows), len(catalog)))
    imputed = np.zeros((len(windows), len(catalog)), dtype=bool)
    labels = np.empty(len(windows), dtype=object)
    provenance = []
    for i, w in enumerate(windows):
        rows[i], imputed[i] = compute_features(w.values, catalog)
        labels[i] = w.label
        provenance.append((w.plant_id, w.channel, w.start_ms))
    return FeatureMatrix(features=rows, labels=labels, feature_names=catalog.names,
                         provenance=provenance, catalog_version=catalog.version,
                         imputed=imputed)


@dataclass(frozen=True)
class MinMaxParams:
    minimum: np.ndarray  # per column, over the fitted rows
    maximum: np.ndarray


def fit_minmax(train_rows: np.ndarray) -> MinMaxParams:
    if len(train_rows) == 0:
        raise ValueError("cannot fit min-max on zero rows")
    return MinMaxParams(minimum=np.min(train_rows, axis=0),
                        maximum=np.max(train_rows, axis=0))


def apply_minmax(params: MinMaxParams, rows: np.ndarray) -> np.ndarray:
    """Scale by the fitted range; values outside [0,1] are not clipped.

    Degenerate columns (min == max at fit time) map every value to 0.
    """
    span = params.maximum - params.minimum
    out = np.zeros_like(rows, dtype=float)
    live = span > 0
    out[:, live] = (rows[:, live] - params.minimum[live]) / span[live]
    return out


def write_feature_csv(matrix: FeatureMatrix, path: str | Path) -> None:
    """Feature columns, then label and provenance; catalog in a sidecar."""
    path = Path(path)
    header = list(matrix.feature_names) + ["label", "plant_id", "channel", "start_ms"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(matrix.n_rows):
            row = [repr(v) for v in matrix.features[i].tolist()]
            plant_id, channel, start_ms = matrix.provenance[i]
            row += [matrix.labels[i], plant_id, channel, start_ms]
            writer.writerow(row)
    sidecar = {
        "catalog_version": matrix.catalog_version,
        "feature_names": matrix.feature_names,
        "n_rows": matrix.n_rows,
        "imputed_values": int(matrix.imputed.sum()) if matrix.imputed is not None else 0,
    }
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))


def read_feature_csv(path: str | Path) -> FeatureMatrix:
    path = Path(path)
    sidecar = json.loads(path.with_suffix(".json").read_text())
    names = sidecar["feature_names"]
    d = len(names)
    features, labels, provenance = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:d] != names:
            raise ValueError("feature CSV does not match its sidecar catalog")
        for row in reader:
            features.append([float(v) for v in row[:d]])
            labels.append(row[d])
            provenance.append((row[d + 1], row[d + 2], int(row[d + 3])))
    return FeatureMatrix(features=np.array(features, dtype=float),
                         labels=np.array(labels, dtype=object),
                         feature_names=names, provenance=provenance,
                         catalog_version=sidecar["catalog_version"])
