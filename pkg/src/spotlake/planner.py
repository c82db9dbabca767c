"""Placement-query planning under vendor API caps.

Every supported (instance type, region) pair must be covered by a query, each
query returns at most `capacity` per-AZ scores, and each account may issue at
most `per_account_limit` distinct queries per day. Regions are packed per
instance type (a region's AZs cannot be split across queries), so planning one
type is a small bin-packing instance solved exactly; the resulting queries are
dealt across accounts in stable order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .model import SpotlakeError

DEFAULT_CAPACITY = 10
DEFAULT_PER_ACCOUNT = 50
EXACT_SOLVER_MAX_REGIONS = 20
ORACLE_MAX_ITEMS = 12


class RegionTooLarge(SpotlakeError):
    pass


class WeightTooLarge(SpotlakeError):
    pass


class InstanceTooBig(SpotlakeError):
    pass


SupportMap = dict[str, dict[str, int]]
# instance type -> region -> number of AZs supporting it; absence means unsupported.


def validate_support_map(support: SupportMap) -> None:
    for itype, regions in support.items():
        for region, az_count in regions.items():
            if not isinstance(az_count, int) or isinstance(az_count, bool) or az_count < 1:
                raise ValueError(f"azCount for ({itype}, {region}) must be >= 1, got {az_count!r}")


def load_support_map(path: str | Path) -> SupportMap:
    with open(path) as f:
        support = json.load(f)
    validate_support_map(support)
    return support


def save_support_map(support: SupportMap, path: str | Path) -> None:
    with open(path, "w") as f:
        json.dump(support, f, indent=1, sort_keys=True)
        f.write("\n")


def support_pairs(support: SupportMap) -> set[tuple[str, str]]:
    return {(t, r) for t, regions in support.items() for r in regions}


@dataclass(frozen=True)
class PlacementQuery:
    instance_types: tuple[str, ...]
    regions: tuple[str, ...]
    target_capacity: int = 1
    single_az: bool = True

    def __post_init__(self) -> None:
        if not self.instance_types or not self.regions:
            raise ValueError("a placement query needs at least one type and one region")
        if self.target_capacity < 1:
            raise ValueError("target capacity must be positive")

    def key(self) -> tuple[tuple[str, ...], tuple[str, ...], int]:
        # Uniqueness is (types, regions, capacity); the single-AZ flag is not
        # part of the vendor's accounting key.
        return (tuple(sorted(self.instance_types)), tuple(sorted(self.regions)), self.target_capacity)


@dataclass
class QueryPlan:
    assignments: list[tuple[str, list[PlacementQuery]]] = field(default_factory=list)

    def all_queries(self) -> list[tuple[str, PlacementQuery]]:
        return [(account, q) for account, queries in self.assignments for q in queries]

    def covered_pairs(self) -> list[tuple[str, str]]:
        out = []
        for _, q in self.all_queries():
            for t in q.instance_types:
                for r in q.regions:
                    out.append((t, r))
        return out


@dataclass(frozen=True)
class QueryCount:
    naive: int  # |types| x |global region set|, the dense upper-bound accounting
    pairs: int  # exact number of supported (type, region) pairs


def naive_query_count(support: SupportMap) -> QueryCount:
    regions: set[str] = set()
    pairs = 0
    for type_regions in support.values():
        regions.update(type_regions)
        pairs += len(type_regions)
    return QueryCount(naive=len(support) * len(regions), pairs=pairs)


def first_fit_decreasing(weights: dict[str, int], capacity: int) -> list[list[str]]:
    bins: list[list[str]] = []
    loads: list[int] = []
    for name in sorted(weights, key=lambda r: (-weights[r], r)):
        w = weights[name]
        for i, load in enumerate(loads):
            if load + w <= capacity:
                bins[i].append(name)
                loads[i] += w
                break
        else:
            bins.append([name])
            loads.append(w)
    return [sorted(b) for b in bins]


def _bnb_min_bins(weights: list[int], capacity: int) -> int:
    """Exact minimum bin count: DFS with a first-fit-decreasing upper bound,
    a remaining-volume lower bound, and equal-load symmetry skipping."""
    items = sorted(weights, reverse=True)
    n = len(items)
    ffd = first_fit_decreasing({f"i{k:03d}": w for k, w in enumerate(items)}, capacity)
    best = len(ffd)
    lb0 = -(-sum(items) // capacity)
    if best == lb0:
        return best
    suffix = [0] * (n + 1)
    for k in range(n - 1, -1, -1):
        suffix[k] = suffix[k + 1] + items[k]

    loads: list[int] = []

    def dfs(idx: int) -> None:
        nonlocal best
        if len(loads) >= best:
            return
        if idx == n:
            best = len(loads)
            return
        residual = sum(capacity - l for l in loads)
        overflow = suffix[idx] - residual
        if overflow > 0 and len(loads) + -(-overflow // capacity) >= best:
            return
        w = items[idx]
        seen: set[int] = set()
        for i, load in enumerate(loads):
            if load + w <= capacity and load not in seen:
                seen.add(load)
                loads[i] = load + w
                dfs(idx + 1)
                loads[i] = load
        if len(loads) + 1 < best:
            loads.append(w)
            dfs(idx + 1)
            loads.pop()

    dfs(0)
    return best


def _lex_smallest_packing(weights: dict[str, int], capacity: int, k: int) -> list[list[str]]:
    """First k-bin packing found by DFS over items in name order, trying
    earliest bins first: minimizes the per-item bin-assignment vector, which
    makes plans reproducible."""
    names = sorted(weights)
    n = len(names)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + weights[names[i]]

    loads: list[int] = []
    members: list[list[str]] = []
    out: list[list[str]] | None = None

    def dfs(idx: int) -> bool:
        nonlocal out
        if idx == n:
            out = [list(b) for b in members]
            return True
        residual = sum(capacity - l for l in loads) + (k - len(loads)) * capacity
        if suffix[idx] > residual:
            return False
        w = weights[names[idx]]
        for i, load in enumerate(loads):
            if load + w <= capacity:
                loads[i] = load + w
                members[i].append(names[idx])
                if dfs(idx + 1):
                    return True
                members[i].pop()
                loads[i] = load
        if len(loads) < k:
            loads.append(w)
            members.append([names[idx]])
            if dfs(idx + 1):
                return True
            members.pop()
            loads.pop()
        return False

    if not dfs(0):
        raise AssertionError("packing with the proven optimal bin count must exist")
    assert out is not None
    return out


def pack_regions(weights: dict[str, int], capacity: int = DEFAULT_CAPACITY) -> list[list[str]]:
    """Partition regions into groups whose AZ counts sum to <= capacity.

    Exact (minimal group count, canonical grouping) up to
    EXACT_SOLVER_MAX_REGIONS regions; first-fit-decreasing beyond that.
    """
    if not weights:
        return []
    for region, w in weights.items():
        if w > capacity:
            raise RegionTooLarge(f"region {region} has {w} AZs, more than capacity {capacity}")
    if len(weights) > EXACT_SOLVER_MAX_REGIONS:
        bins = first_fit_decreasing(weights, capacity)
    else:
        k = _bnb_min_bins(list(weights.values()), capacity)
        bins = _lex_smallest_packing(weights, capacity, k)
    return sorted([sorted(b) for b in bins], key=lambda b: b[0])


def plan_queries(support: SupportMap, capacity: int = DEFAULT_CAPACITY) -> list[PlacementQuery]:
    """One single-type, single-AZ query per region group, covering every
    supported (type, region) pair exactly once."""
    validate_support_map(support)
    queries: list[PlacementQuery] = []
    for itype in sorted(support):
        for group in pack_regions(support[itype], capacity):
            queries.append(
                PlacementQuery(
                    instance_types=(itype,),
                    regions=tuple(group),
                    target_capacity=1,
                    single_az=True,
                )
            )
    return queries


def optimal_bin_count_oracle(weights: list[int], capacity: int) -> int:
    """Exact minimum bin count by exhaustive partition search.

    Independent of the production solver: plain block-assignment enumeration
    with only a best-so-far cutoff. Limited to ORACLE_MAX_ITEMS items.
    """
    if len(weights) > ORACLE_MAX_ITEMS:
        raise InstanceTooBig(f"oracle handles at most {ORACLE_MAX_ITEMS} items, got {len(weights)}")
    for w in weights:
        if w > capacity:
            raise WeightTooLarge(f"weight {w} exceeds capacity {capacity}")
    if not weights:
        return 0

    n = len(weights)
    best = n

    blocks: list[int] = []

    def enumerate_partitions(idx: int) -> None:
        nonlocal best
        if len(blocks) >= best:
            return
        if idx == n:
            best = len(blocks)
            return
        w = weights[idx]
        for i in range(len(blocks)):
            if blocks[i] + w <= capacity:
                blocks[i] += w
                enumerate_partitions(idx + 1)
                blocks[i] -= w
        blocks.append(w)
        enumerate_partitions(idx + 1)
        blocks.pop()

    enumerate_partitions(0)
    return best


def shard_accounts(
    queries: list[PlacementQuery], per_account_limit: int = DEFAULT_PER_ACCOUNT
) -> QueryPlan:
    """Deal queries across accounts in stable order, ceil(|queries|/limit) accounts."""
    if per_account_limit < 1:
        raise ValueError("per-account limit must be >= 1")
    plan = QueryPlan()
    for start in range(0, len(queries), per_account_limit):
        account = f"acct-{start // per_account_limit + 1:03d}"
        plan.assignments.append((account, list(queries[start : start + per_account_limit])))
    return plan


def save_plan(plan: QueryPlan, path: str | Path) -> None:
    rows = [
        {
            "account": account,
            "instanceTypes": list(q.instance_types),
            "regions": list(q.regions),
            "targetCapacity": q.target_capacity,
            "singleAz": q.single_az,
        }
        for account, q in plan.all_queries()
    ]
    with open(path, "w") as f:
        json.dump(rows, f, indent=1)
        f.write("\n")


def load_plan(path: str | Path) -> QueryPlan:
    with open(path) as f:
        rows = json.load(f)
    plan = QueryPlan()
    current: str | None = None
    queries: list[PlacementQuery] = []
    for row in rows:
        q = PlacementQuery(
            instance_types=tuple(row["instanceTypes"]),
            regions=tuple(row["regions"]),
            target_capacity=row["targetCapacity"],
            single_az=row["singleAz"],
        )
        if row["account"] != current:
            if current is not None:
                plan.assignments.append((current, queries))
            current = row["account"]
            queries = []
        queries.append(q)
    if current is not None:
        plan.assignments.append((current, queries))
    return plan
