"""Periodic collection: run a query plan against the vendor and archive all
three feeds as records stamped with the tick time.

The vendor is anything satisfying VendorFeed (the in-process simulator or its
HTTP facade), so the same loop drives tests and wire-path runs. A tick buffers
every record it produced and appends them as one batch: either the whole tick
becomes visible or none of it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Protocol

from .model import (
    ArchiveRecord,
    Metric,
    SpotlakeError,
    Timestamp,
    format_rfc3339,
    interruption_band_to_score,
    region_of_az,
)
from .planner import PlacementQuery, QueryPlan
from .simulator import AdvisorEntry, QueryBudgetExhausted, World
from .store import ArchiveStore, StorageFull


class StoreUnavailable(SpotlakeError):
    pass


class VendorFeed(Protocol):
    def placement_scores(self, account: str, query: PlacementQuery) -> list[tuple[str, int]]: ...

    def advisor(self) -> list[AdvisorEntry]: ...

    def price_at(self, instance: str, az: str, ts: Timestamp) -> float: ...

    def catalog_pairs(self) -> list[tuple[str, str]]: ...

    def now(self) -> Timestamp: ...

    def advance(self, seconds: int) -> None: ...


class SimVendor:
    """In-process vendor: direct calls into a simulator world."""

    def __init__(self, world: World):
        self.world = world

    def placement_scores(self, account: str, query: PlacementQuery) -> list[tuple[str, int]]:
        return self.world.placement_score_query(account, query)

    def advisor(self) -> list[AdvisorEntry]:
        return self.world.advisor_snapshot()

    def price_at(self, instance: str, az: str, ts: Timestamp) -> float:
        records = self.world.price_history(instance, az, ts, ts)
        return records[0].price_usd_per_hour

    def catalog_pairs(self) -> list[tuple[str, str]]:
        return self.world.universe.pairs()

    def now(self) -> Timestamp:
        return self.world.clock

    def advance(self, seconds: int) -> None:
        self.world.advance(seconds)


@dataclass
class CollectionSchedule:
    plan: QueryPlan
    placement_period_s: int = 600
    advisor_period_s: int = 600
    price_period_s: int = 600

    def __post_init__(self) -> None:
        for period in (self.placement_period_s, self.advisor_period_s, self.price_period_s):
            if period <= 0:
                raise ValueError("collection periods must be positive")


@dataclass
class CollectionReport:
    tick: Timestamp
    attempted: int = 0
    succeeded: int = 0
    failed: int = 0
    budget_exhaustions: int = 0
    records_written: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "tick": format_rfc3339(self.tick),
                "attempted": self.attempted,
                "succeeded": self.succeeded,
                "failed": self.failed,
                "budgetExhaustions": self.budget_exhaustions,
                "recordsWritten": self.records_written,
            },
            separators=(",", ":"),
        )


def _call_with_retry(fn, report: CollectionReport):
    """One immediate retry, then record the failure and move on."""
    report.attempted += 1
    for attempt in (0, 1):
        try:
            result = fn()
            report.succeeded += 1
            return result
        except QueryBudgetExhausted:
            if attempt == 1:
                report.failed += 1
                report.budget_exhaustions += 1
                return None
        except SpotlakeError:
            if attempt == 1:
                report.failed += 1
                return None
    return None


def run_tick(
    schedule: CollectionSchedule,
    vendor: VendorFeed,
    store: ArchiveStore,
    due_feeds: set[str] | None = None,
) -> CollectionReport:
    """Poll every due feed once, convert results to records, append one batch."""
    due = due_feeds if due_feeds is not None else {"placement", "advisor", "price"}
    now = vendor.now()
    pairs = vendor.catalog_pairs()
    report = CollectionReport(tick=now)
    records: list[ArchiveRecord] = []

    if "placement" in due:
        for account, query in schedule.plan.all_queries():
            results = _call_with_retry(
                lambda a=account, q=query: vendor.placement_scores(a, q), report
            )
            if results is None:
                continue
            for location, score in results:
                if query.single_az:
                    region = region_of_az(location)
                    az: str | None = location
                else:
                    region, az = location, None
                records.append(
                    ArchiveRecord(
                        ts=now,
                        instance=query.instance_types[0],
                        region=region,
                        az=az,
                        metric=Metric.PLACEMENT_SCORE,
                        value=float(score),
                    )
                )

    if "advisor" in due and pairs:
        entries = _call_with_retry(vendor.advisor, report)
        for entry in entries or []:
            records.append(
                ArchiveRecord(
                    ts=now,
                    instance=entry.instance,
                    region=entry.region,
                    az=None,
                    metric=Metric.INTERRUPTION_FREE,
                    value=interruption_band_to_score(entry.band),
                )
            )
            records.append(
                ArchiveRecord(
                    ts=now,
                    instance=entry.instance,
                    region=entry.region,
                    az=None,
                    metric=Metric.SAVINGS,
                    value=entry.savings,
                )
            )

    if "price" in due:
        for instance, az in pairs:
            price = _call_with_retry(
                lambda i=instance, a=az: vendor.price_at(i, a, now), report
            )
            if price is None:
                continue
            records.append(
                ArchiveRecord(
                    ts=now,
                    instance=instance,
                    region=region_of_az(az),
                    az=az,
                    metric=Metric.SPOT_PRICE,
                    value=price,
                )
            )

    try:
        report.records_written = store.append(records)
    except StorageFull as exc:
        raise StoreUnavailable(str(exc)) from exc
    return report


def run_loop(
    schedule: CollectionSchedule,
    vendor: VendorFeed,
    store: ArchiveStore,
    until: Timestamp,
) -> list[CollectionReport]:
    """Tick at each feed's period boundary until the deadline, advancing the
    vendor clock in lockstep. Ticks never overlap."""
    reports: list[CollectionReport] = []
    next_due = {
        "placement": vendor.now(),
        "advisor": vendor.now(),
        "price": vendor.now(),
    }
    periods = {
        "placement": schedule.placement_period_s,
        "advisor": schedule.advisor_period_s,
        "price": schedule.price_period_s,
    }
    while True:
        now = vendor.now()
        due = {feed for feed, at in next_due.items() if at <= now}
        if due and now < until:
            reports.append(run_tick(schedule, vendor, store, due))
            for feed in due:
                next_due[feed] = now + periods[feed]
        upcoming = min(next_due.values())
        if upcoming >= until:
            break
        if upcoming > now:
            vendor.advance(upcoming - now)
    return reports
