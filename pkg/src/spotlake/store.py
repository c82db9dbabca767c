"""Append-only time-series persistence with dimensional queries.

Layout: one JSONL segment file per UTC day under <path>/segments plus a
commit log; a batch is visible only once its sequence number is committed, so
torn writes vanish on reopen. The in-memory index keeps per-series parallel
arrays (timestamp, value, committing batch) rebuilt on open.

Region-granular metrics (interruption-free score, savings) are stored once
per (type, region) with a null AZ and fanned out to AZ-level series keys on
read.
"""

from __future__ import annotations

import json
import os
from array import array
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable

from .model import (
    ArchiveRecord,
    Metric,
    REGION_GRANULAR_METRICS,
    SpotlakeError,
    Timestamp,
    format_rfc3339,
    parse_rfc3339,
    record_from_json,
    record_to_json,
    region_of_az,
    utc_day,
)

Key = tuple[str, str, str, str]  # (metric, instance, region, az-or-empty)


class StorageFull(SpotlakeError):
    pass


class CorruptBatch(SpotlakeError):
    pass


class SeriesNotFound(SpotlakeError):
    pass


class RangeInverted(SpotlakeError):
    pass


@dataclass(frozen=True)
class ChangeEvent:
    key: Key
    at: Timestamp
    old_value: float
    new_value: float


class _Series:
    __slots__ = ("ts", "vals", "seqs")

    def __init__(self) -> None:
        self.ts = array("q")
        self.vals = array("d")
        self.seqs = array("q")

    def insert(self, ts: int, value: float, seq: int) -> None:
        if not self.ts or ts > self.ts[-1]:
            self.ts.append(ts)
            self.vals.append(value)
            self.seqs.append(seq)
            return
        i = bisect_left(self.ts, ts)
        self.ts.insert(i, ts)
        self.vals.insert(i, value)
        self.seqs.insert(i, seq)

    def has_ts(self, ts: int) -> bool:
        i = bisect_left(self.ts, ts)
        return i < len(self.ts) and self.ts[i] == ts


class ArchiveStore:
    """Single writer, snapshot reads. Pass path=None for a memory-only store."""

    def __init__(self, path: str | Path | None):
        self._series: dict[Key, _Series] = {}
        self.version = 0
        self._path = Path(path) if path is not None else None
        if self._path is not None:
            (self._path / "segments").mkdir(parents=True, exist_ok=True)
            self._load()

    # -- persistence ---------------------------------------------------------

    def _commits_path(self) -> Path:
        assert self._path is not None
        return self._path / "commits.log"

    def _load(self) -> None:
        assert self._path is not None
        committed: set[int] = set()
        if self._commits_path().exists():
            for line in self._commits_path().read_text().splitlines():
                line = line.strip()
                if line:
                    committed.add(int(line))
        self.version = max(committed, default=0)
        seg_dir = self._path / "segments"
        for seg in sorted(seg_dir.glob("*.jsonl")):
            with open(seg) as f:
                for line in f:
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        row = json.loads(line)
                        seq = row["s"]
                    except (ValueError, KeyError):
                        continue  # torn tail of an uncommitted batch
                    if seq not in committed:
                        continue
                    key = (row["m"], row["i"], row["r"], row["a"] or "")
                    self._series.setdefault(key, _Series()).insert(row["t"], row["v"], seq)

    def _write_rows(self, rows: list[tuple[Key, int, float]], seq: int) -> None:
        assert self._path is not None
        by_day: dict[str, list[str]] = {}
        for key, ts, value in rows:
            metric, instance, region, az = key
            line = json.dumps(
                {"s": seq, "t": ts, "i": instance, "r": region, "a": az or None, "m": metric, "v": value},
                separators=(",", ":"),
            )
            by_day.setdefault(utc_day(ts), []).append(line)
        try:
            for day, lines in sorted(by_day.items()):
                with open(self._path / "segments" / f"{day}.jsonl", "a") as f:
                    f.write("\n".join(lines) + "\n")
            with open(self._commits_path(), "a") as f:
                f.write(f"{seq}\n")
                f.flush()
                os.fsync(f.fileno())
        except OSError as exc:
            raise StorageFull(f"archive write failed: {exc}") from exc

    # -- writes ----------------------------------------------------------------

    def append(self, records: Iterable[ArchiveRecord]) -> int:
        """Append a batch atomically; per-record duplicates of an existing
        (series, timestamp) are skipped. Returns the accepted count."""
        seq = self.version + 1
        fresh: list[tuple[Key, int, float]] = []
        batch_seen: set[tuple[Key, int]] = set()
        for rec in records:
            key = rec.key()
            if (key, rec.ts) in batch_seen:
                continue
            series = self._series.get(key)
            if series is not None and series.has_ts(rec.ts):
                continue
            batch_seen.add((key, rec.ts))
            fresh.append((key, rec.ts, rec.value))
        if self._path is not None and fresh:
            self._write_rows(fresh, seq)
        for key, ts, value in fresh:
            self._series.setdefault(key, _Series()).insert(ts, value, seq)
        self.version = seq
        return len(fresh)

    # -- reads -------------------------------------------------------------------

    def _resolve_key(self, key: Key) -> Key:
        """Map an AZ-level key of a region-granular metric onto its stored
        region-level series."""
        metric, instance, region, az = key
        if key in self._series:
            return key
        if az and Metric(metric) in REGION_GRANULAR_METRICS:
            region_key = (metric, instance, region, "")
            if region_key in self._series:
                return region_key
        return key

    def has_series(self, key: Key) -> bool:
        return self._resolve_key(key) in self._series

    def series_keys(self, metric: Metric | None = None) -> list[Key]:
        keys = [k for k in self._series if metric is None or k[0] == metric.value]
        return sorted(keys)

    def _row_matches(
        self,
        key: Key,
        instances: set[str] | None,
        regions: set[str] | None,
        azs: set[str] | None,
    ) -> bool:
        metric, instance, region, az = key
        if instances is not None and instance not in instances:
            return False
        if regions is not None and region not in regions:
            return False
        if azs is not None:
            if az:
                return az in azs
            # region-level rows match an AZ filter through their region
            return any(region_of_az(a) == region for a in azs)
        return True

    def query(
        self,
        t_from: Timestamp,
        t_to: Timestamp,
        instances: Iterable[str] | None = None,
        regions: Iterable[str] | None = None,
        azs: Iterable[str] | None = None,
        metrics: Iterable[Metric] | None = None,
        max_version: int | None = None,
    ) -> list[ArchiveRecord]:
        if t_from > t_to:
            raise RangeInverted(f"from {t_from} after to {t_to}")
        instance_set = set(instances) if instances is not None else None
        region_set = set(regions) if regions is not None else None
        az_set = set(azs) if azs is not None else None
        metric_set = {m.value for m in metrics} if metrics is not None else None

        out: list[ArchiveRecord] = []
        for key in sorted(self._series):
            if metric_set is not None and key[0] not in metric_set:
                continue
            if not self._row_matches(key, instance_set, region_set, az_set):
                continue
            series = self._series[key]
            lo = bisect_left(series.ts, t_from)
            hi = bisect_right(series.ts, t_to)
            metric = Metric(key[0])
            for i in range(lo, hi):
                if max_version is not None and series.seqs[i] > max_version:
                    continue
                out.append(
                    ArchiveRecord(
                        ts=series.ts[i],
                        instance=key[1],
                        region=key[2],
                        az=key[3] or None,
                        metric=metric,
                        value=series.vals[i],
                    )
                )
        return out

    def change_events(
        self, key: Key, t_from: Timestamp | None = None, t_to: Timestamp | None = None
    ) -> list[ChangeEvent]:
        """Consecutive-sample comparison; the first sample produces no event."""
        resolved = self._resolve_key(key)
        series = self._series.get(resolved)
        if series is None:
            raise SeriesNotFound(f"no series {key}")
        lo = 0 if t_from is None else bisect_left(series.ts, t_from)
        hi = len(series.ts) if t_to is None else bisect_right(series.ts, t_to)
        events: list[ChangeEvent] = []
        for i in range(lo + 1, hi):
            if series.vals[i] != series.vals[i - 1]:
                events.append(
                    ChangeEvent(
                        key=key,
                        at=series.ts[i],
                        old_value=series.vals[i - 1],
                        new_value=series.vals[i],
                    )
                )
        return events

    def resample_ffill(
        self, key: Key, grid_s: int, t_from: Timestamp, t_to: Timestamp
    ) -> list[tuple[Timestamp, float]]:
        """Forward-fill onto the regular grid from..to; grid points before the
        first sample are absent."""
        if grid_s <= 0:
            raise ValueError("grid must be positive")
        if t_from > t_to:
            raise RangeInverted(f"from {t_from} after to {t_to}")
        resolved = self._resolve_key(key)
        series = self._series.get(resolved)
        if series is None:
            raise SeriesNotFound(f"no series {key}")
        out: list[tuple[Timestamp, float]] = []
        for t in range(t_from, t_to + 1, grid_s):
            i = bisect_right(series.ts, t)
            if i == 0:
                continue
            out.append((t, series.vals[i - 1]))
        return out

    def series_samples(self, key: Key) -> list[tuple[Timestamp, float]]:
        resolved = self._resolve_key(key)
        series = self._series.get(resolved)
        if series is None:
            raise SeriesNotFound(f"no series {key}")
        return list(zip(series.ts, series.vals))

    def series_bounds(self, key: Key) -> tuple[Timestamp, Timestamp] | None:
        resolved = self._resolve_key(key)
        series = self._series.get(resolved)
        if series is None or not series.ts:
            return None
        return series.ts[0], series.ts[-1]

    def span(self) -> tuple[Timestamp, Timestamp] | None:
        lo: int | None = None
        hi: int | None = None
        for series in self._series.values():
            if not series.ts:
                continue
            if lo is None or series.ts[0] < lo:
                lo = series.ts[0]
            if hi is None or series.ts[-1] > hi:
                hi = series.ts[-1]
        if lo is None or hi is None:
            return None
        return lo, hi

    def dimensions(self) -> dict[str, list[str]]:
        instances: set[str] = set()
        regions: set[str] = set()
        azs: set[str] = set()
        metrics: set[str] = set()
        for metric, instance, region, az in self._series:
            metrics.add(metric)
            instances.add(instance)
            regions.add(region)
            if az:
                azs.add(az)
        return {
            "instances": sorted(instances),
            "regions": sorted(regions),
            "azs": sorted(azs),
            "metrics": sorted(metrics),
        }

    def count(self) -> int:
        return sum(len(s.ts) for s in self._series.values())

    # -- export / import -----------------------------------------------------

    def export_records(
        self,
        out: IO[str],
        t_from: Timestamp | None = None,
        t_to: Timestamp | None = None,
        instances: Iterable[str] | None = None,
        regions: Iterable[str] | None = None,
        azs: Iterable[str] | None = None,
        metrics: Iterable[Metric] | None = None,
    ) -> int:
        span = self.span()
        if span is None:
            return 0
        lo = span[0] if t_from is None else t_from
        hi = span[1] if t_to is None else t_to
        n = 0
        for rec in self.query(lo, hi, instances, regions, azs, metrics):
            out.write(record_to_json(rec) + "\n")
            n += 1
        return n

    def import_records(self, source: IO[str]) -> int:
        records: list[ArchiveRecord] = []
        for lineno, line in enumerate(source, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(record_from_json(line))
            except (ValueError, KeyError) as exc:
                raise CorruptBatch(f"bad record at line {lineno}: {exc}") from exc
        return self.append(records)
