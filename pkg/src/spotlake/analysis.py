"""Statistical computations over the archive: correlations, distributions,
score differences, update-frequency CDFs, and aggregations.

All operations are pure over a store snapshot and return table/figure-ready
values; rendering lives elsewhere. Cross-metric comparisons align series on a
regular grid with forward-fill (default 10 minutes, the collection cadence)
and pair series per (instance, AZ), fanning region-granular metrics out to
AZ level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    InstanceType,
    Metric,
    OutOfBandScore,
    SpotlakeError,
    Timestamp,
    size_rank,
    utc_day,
)
from .store import ArchiveStore, Key

DEFAULT_GRID_S = 600

SCORE_VALUES = (1.0, 1.5, 2.0, 2.5, 3.0)
DIFF_BINS = (0.0, 0.5, 1.0, 1.5, 2.0)

FAMILY_CLASS_ORDER = [
    "general",
    "compute-optimized",
    "memory-optimized",
    "accelerated-computing",
    "storage-optimized",
]


class LengthMismatch(SpotlakeError):
    pass


@dataclass(frozen=True)
class AlignedSeriesPair:
    x: tuple[float, ...]
    y: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.x) != len(self.y):
            raise LengthMismatch(f"|X|={len(self.x)} != |Y|={len(self.y)}")
        if len(self.x) < 2:
            raise LengthMismatch("aligned series need at least two points")


def pearson(pair: AlignedSeriesPair) -> float | None:
    """Pearson correlation coefficient; None when either series has zero
    variance (undefined, excluded from downstream CDFs)."""
    x = np.asarray(pair.x, dtype=float)
    y = np.asarray(pair.y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = math.sqrt(float(np.dot(dx, dx))) * math.sqrt(float(np.dot(dy, dy)))
    if denom == 0.0:
        return None
    return float(np.dot(dx, dy)) / denom


@dataclass
class Histogram:
    labels: tuple[float, ...]
    counts: dict[float, int]
    total: int

    def fractions(self) -> dict[float, float]:
        if self.total == 0:
            return {label: 0.0 for label in self.labels}
        return {label: self.counts.get(label, 0) / self.total for label in self.labels}


def _map_sps_value(value: float) -> float:
    if value not in (1.0, 2.0, 3.0):
        raise OutOfBandScore(f"archived placement score {value} outside single-type range")
    return value


def _az_catalog(store: ArchiveStore) -> dict[str, list[tuple[str, str]]]:
    """instance -> [(region, az)] from AZ-granular series of any metric."""
    out: dict[str, set[tuple[str, str]]] = {}
    for metric, instance, region, az in store.series_keys():
        if az:
            out.setdefault(instance, set()).add((region, az))
    return {i: sorted(pairs) for i, pairs in out.items()}


def _aligned_pair(
    store: ArchiveStore,
    instance: str,
    region: str,
    az: str,
    metric_a: Metric,
    metric_b: Metric,
    grid_s: int,
    t_from: Timestamp | None,
    t_to: Timestamp | None,
) -> tuple[list[float], list[float]] | None:
    key_a: Key = (metric_a.value, instance, region, az)
    key_b: Key = (metric_b.value, instance, region, az)
    if not (store.has_series(key_a) and store.has_series(key_b)):
        return None
    bounds_a = store.series_bounds(key_a)
    bounds_b = store.series_bounds(key_b)
    assert bounds_a and bounds_b
    lo = max(bounds_a[0], bounds_b[0])
    hi = min(bounds_a[1], bounds_b[1])
    if t_from is not None:
        lo = max(lo, t_from)
    if t_to is not None:
        hi = min(hi, t_to)
    if hi < lo:
        return None
    xs = store.resample_ffill(key_a, grid_s, lo, hi)
    ys = store.resample_ffill(key_b, grid_s, lo, hi)
    if len(xs) != len(ys) or len(xs) < 2:
        return None
    return [v for _, v in xs], [v for _, v in ys]


@dataclass
class CorrelationCdf:
    metric_a: str
    metric_b: str
    coefficients: list[float]  # sorted ascending
    pairs_total: int
    excluded: int  # zero-variance or too-short pairs

    def fraction_abs_below(self, threshold: float) -> float:
        if not self.coefficients:
            return 0.0
        return sum(1 for c in self.coefficients if abs(c) < threshold) / len(self.coefficients)

    def summary(self) -> dict:
        return {
            "metricA": self.metric_a,
            "metricB": self.metric_b,
            "pairsTotal": self.pairs_total,
            "defined": len(self.coefficients),
            "excluded": self.excluded,
            "fractionAbsBelow025": self.fraction_abs_below(0.25),
            "fractionAbsBelow05": self.fraction_abs_below(0.5),
        }


def correlation_cdf(
    store: ArchiveStore,
    metric_a: Metric,
    metric_b: Metric,
    grid_s: int = DEFAULT_GRID_S,
    t_from: Timestamp | None = None,
    t_to: Timestamp | None = None,
) -> CorrelationCdf:
    """Per-(instance, AZ) correlation coefficients between two metrics."""
    coefficients: list[float] = []
    pairs_total = 0
    excluded = 0
    for instance, places in _az_catalog(store).items():
        for region, az in places:
            if not (
                store.has_series((metric_a.value, instance, region, az))
                and store.has_series((metric_b.value, instance, region, az))
            ):
                continue
            pairs_total += 1
            aligned = _aligned_pair(store, instance, region, az, metric_a, metric_b, grid_s, t_from, t_to)
            if aligned is None:
                excluded += 1
                continue
            r = pearson(AlignedSeriesPair(tuple(aligned[0]), tuple(aligned[1])))
            if r is None:
                excluded += 1
            else:
                coefficients.append(r)
    coefficients.sort()
    return CorrelationCdf(
        metric_a=metric_a.value,
        metric_b=metric_b.value,
        coefficients=coefficients,
        pairs_total=pairs_total,
        excluded=excluded,
    )


def value_distribution(
    store: ArchiveStore,
    metric: Metric,
    t_from: Timestamp | None = None,
    t_to: Timestamp | None = None,
) -> Histogram:
    """Share of observations per score value; placement scores map {1,2,3}
    onto {1.0, 2.0, 3.0} and never populate the half-step bins."""
    if metric not in (Metric.PLACEMENT_SCORE, Metric.INTERRUPTION_FREE):
        raise ValueError(f"value distribution is defined for score metrics, not {metric.value}")
    span = store.span()
    counts: dict[float, int] = {}
    total = 0
    if span is not None:
        lo = span[0] if t_from is None else t_from
        hi = span[1] if t_to is None else t_to
        if lo <= hi:
            for key in store.series_keys(metric):
                for ts, value in store.series_samples(key):
                    if not lo <= ts <= hi:
                        continue
                    v = _map_sps_value(value) if metric is Metric.PLACEMENT_SCORE else value
                    counts[v] = counts.get(v, 0) + 1
                    total += 1
    return Histogram(labels=SCORE_VALUES, counts=counts, total=total)


@dataclass
class DifferenceHistogram:
    histogram: Histogram
    fraction_at_2: float
    fraction_ge_1_5: float


def score_difference_histogram(
    store: ArchiveStore,
    grid_s: int = DEFAULT_GRID_S,
    t_from: Timestamp | None = None,
    t_to: Timestamp | None = None,
) -> DifferenceHistogram:
    """Distribution of |placement score - interruption-free score| per pair
    per grid point; 2.0 means the two datasets fully contradict."""
    counts: dict[float, int] = {}
    total = 0
    for instance, places in _az_catalog(store).items():
        for region, az in places:
            aligned = _aligned_pair(
                store, instance, region, az,
                Metric.PLACEMENT_SCORE, Metric.INTERRUPTION_FREE,
                grid_s, t_from, t_to,
            )
            if aligned is None:
                continue
            for sps, if_score in zip(*aligned):
                diff = abs(_map_sps_value(sps) - if_score)
                diff = round(diff * 2) / 2
                counts[diff] = counts.get(diff, 0) + 1
                total += 1
    hist = Histogram(labels=DIFF_BINS, counts=counts, total=total)
    fracs = hist.fractions()
    return DifferenceHistogram(
        histogram=hist,
        fraction_at_2=fracs[2.0],
        fraction_ge_1_5=fracs[1.5] + fracs[2.0],
    )


@dataclass
class FrequencyCdf:
    metric: str
    gaps_hours: list[float]  # sorted ascending
    series_count: int

    def median(self) -> float | None:
        if not self.gaps_hours:
            return None
        n = len(self.gaps_hours)
        mid = n // 2
        if n % 2 == 1:
            return self.gaps_hours[mid]
        return 0.5 * (self.gaps_hours[mid - 1] + self.gaps_hours[mid])


def update_frequency_cdf(store: ArchiveStore, metric: Metric) -> FrequencyCdf:
    """Pooled inter-change gaps (hours) across all stored series of a metric."""
    gaps: list[float] = []
    keys = store.series_keys(metric)
    for key in keys:
        events = store.change_events(key)
        for prev, cur in zip(events, events[1:]):
            gaps.append((cur.at - prev.at) / 3600.0)
    gaps.sort()
    return FrequencyCdf(metric=metric.value, gaps_hours=gaps, series_count=len(keys))


@dataclass
class HeatmapResult:
    row_dim: str
    col_dim: str
    metric: str
    rows: list[str]
    cols: list[str]
    cells: list[list[float | None]]  # None marks unsupported combinations (NA)


def _row_label(instance: str, row_dim: str) -> str:
    info = InstanceType.parse(instance)
    if row_dim == "familyClass":
        return info.family_class.value
    if row_dim == "family":
        return info.family
    raise ValueError(f"unknown row dimension {row_dim!r}")


def _sorted_rows(labels: set[str], row_dim: str) -> list[str]:
    if row_dim == "familyClass":
        return [c for c in FAMILY_CLASS_ORDER if c in labels]
    return sorted(labels, key=lambda fam: (FAMILY_CLASS_ORDER.index(
        InstanceType.parse(f"{fam}.large").family_class.value), fam))


def aggregate_heatmap(
    store: ArchiveStore,
    row_dim: str,
    col_dim: str,
    metric: Metric,
    t_from: Timestamp | None = None,
    t_to: Timestamp | None = None,
) -> HeatmapResult:
    """Mean metric value per (row, column) cell; cells with no observations
    stay NA."""
    if col_dim not in ("dayIndex", "region"):
        raise ValueError(f"unknown column dimension {col_dim!r}")
    span = store.span()
    sums: dict[tuple[str, str], float] = {}
    counts: dict[tuple[str, str], int] = {}
    row_labels: set[str] = set()
    col_labels: set[str] = set()
    day0 = None if span is None else utc_day(span[0])
    if span is not None:
        lo = span[0] if t_from is None else t_from
        hi = span[1] if t_to is None else t_to
        for key in store.series_keys(metric):
            _, instance, region, az = key
            row = _row_label(instance, row_dim)
            row_labels.add(row)
            for ts, value in store.series_samples(key):
                if not lo <= ts <= hi:
                    continue
                if col_dim == "dayIndex":
                    col = str(_day_index(ts, span[0]))
                else:
                    col = region
                col_labels.add(col)
                sums[(row, col)] = sums.get((row, col), 0.0) + value
                counts[(row, col)] = counts.get((row, col), 0) + 1
    rows = _sorted_rows(row_labels, row_dim)
    if col_dim == "dayIndex":
        cols = sorted(col_labels, key=int)
    else:
        cols = sorted(col_labels)
    cells: list[list[float | None]] = []
    for row in rows:
        line: list[float | None] = []
        for col in cols:
            n = counts.get((row, col), 0)
            line.append(sums[(row, col)] / n if n else None)
        cells.append(line)
    return HeatmapResult(
        row_dim=row_dim, col_dim=col_dim, metric=metric.value, rows=rows, cols=cols, cells=cells
    )


def _day_index(ts: Timestamp, start: Timestamp) -> int:
    from datetime import date

    d = date.fromisoformat(utc_day(ts))
    d0 = date.fromisoformat(utc_day(start))
    return (d - d0).days


@dataclass
class SizeAggregate:
    size: str
    mean_score: float
    type_count: int


def group_by_size(
    store: ArchiveStore,
    metric: Metric,
    min_types_per_size: int = 10,
    t_from: Timestamp | None = None,
    t_to: Timestamp | None = None,
) -> list[SizeAggregate]:
    """Mean score per instance size, keeping sizes backed by enough distinct
    types for the average to be meaningful."""
    span = store.span()
    if span is None:
        return []
    lo = span[0] if t_from is None else t_from
    hi = span[1] if t_to is None else t_to
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    types_per_size: dict[str, set[str]] = {}
    for key in store.series_keys(metric):
        _, instance, _, _ = key
        size = InstanceType.parse(instance).size
        types_per_size.setdefault(size, set()).add(instance)
        for ts, value in store.series_samples(key):
            if lo <= ts <= hi:
                sums[size] = sums.get(size, 0.0) + value
                counts[size] = counts.get(size, 0) + 1
    out = []
    for size in sorted(types_per_size, key=size_rank):
        n_types = len(types_per_size[size])
        if n_types < min_types_per_size or counts.get(size, 0) == 0:
            continue
        out.append(SizeAggregate(size=size, mean_score=sums[size] / counts[size], type_count=n_types))
    return out
