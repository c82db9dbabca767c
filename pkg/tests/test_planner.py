import random

import pytest

from spotlake.planner import (
    InstanceTooBig,
    PlacementQuery,
    RegionTooLarge,
    WeightTooLarge,
    load_plan,
    load_support_map,
    naive_query_count,
    optimal_bin_count_oracle,
    pack_regions,
    plan_queries,
    save_plan,
    save_support_map,
    shard_accounts,
    support_pairs,
)


def test_naive_query_count_product():
    support = {
        "a.large": {"r1": 1, "r2": 2},
        "b.large": {"r1": 3, "r2": 1},
        "c.large": {"r1": 2, "r2": 2},
    }
    counts = naive_query_count(support)
    assert counts.naive == 6
    assert counts.pairs == 6


def test_naive_query_count_empty():
    counts = naive_query_count({})
    assert counts.naive == 0
    assert counts.pairs == 0


def test_naive_query_count_paper_scale():
    rng = random.Random(0)
    regions = [f"region-{i}" for i in range(17)]
    support = {f"m5.{i}xlarge": {r: 1 for r in regions} for i in range(547)}
    assert naive_query_count(support).naive == 9299


def test_pack_single_bin_when_sum_fits():
    assert pack_regions({"A": 3, "B": 3, "C": 4}, 10) == [["A", "B", "C"]]


def test_pack_atomic_regions_force_two_bins():
    assert pack_regions({"A": 6, "B": 6}, 10) == [["A"], ["B"]]


def test_pack_five_fours_need_three_bins():
    # 5 items of weight 4 at capacity 10: two bins hold at most 4 items
    bins = pack_regions({"A": 4, "B": 4, "C": 4, "D": 4, "E": 4}, 10)
    assert bins == [["A", "B"], ["C", "D"], ["E"]]


def test_pack_region_too_large():
    with pytest.raises(RegionTooLarge):
        pack_regions({"A": 11}, 10)


def test_oracle_examples():
    assert optimal_bin_count_oracle([3, 3, 4], 10) == 1
    assert optimal_bin_count_oracle([10], 10) == 1
    assert optimal_bin_count_oracle([6, 6, 6], 10) == 3
    assert optimal_bin_count_oracle([], 10) == 0


def test_oracle_limits():
    with pytest.raises(WeightTooLarge):
        optimal_bin_count_oracle([11], 10)
    with pytest.raises(InstanceTooBig):
        optimal_bin_count_oracle([1] * 13, 10)


def test_plan_queries_shape():
    support = {"m5.large": {"us-east-1": 3, "eu-west-1": 3, "ap-south-1": 4}}
    queries = plan_queries(support)
    assert len(queries) == 1
    q = queries[0]
    assert q.instance_types == ("m5.large",)
    assert q.regions == ("ap-south-1", "eu-west-1", "us-east-1")
    assert q.target_capacity == 1
    assert q.single_az is True


def test_plan_coverage_exactness_random():
    rng = random.Random(4242)
    families = ["m5", "c5", "r5", "t3", "g4dn", "i3"]
    for _ in range(50):
        support = {}
        for i in range(rng.randint(1, 12)):
            fam = rng.choice(families)
            code = f"{fam}.{i}xlarge"
            regions = rng.sample([f"zone-{k}" for k in range(9)], rng.randint(1, 9))
            support[code] = {r: rng.randint(1, 6) for r in regions}
        queries = plan_queries(support)
        covered = []
        for q in queries:
            assert sum(support[q.instance_types[0]][r] for r in q.regions) <= 10
            for t in q.instance_types:
                covered.extend((t, r) for r in q.regions)
        assert len(covered) == len(set(covered))
        assert set(covered) == support_pairs(support)


def test_plan_optimality_small_random():
    rng = random.Random(7)
    for _ in range(200):
        weights = {f"r{j:02d}": rng.randint(1, 6) for j in range(rng.randint(1, 12))}
        bins = pack_regions(weights, 10)
        assert len(bins) == optimal_bin_count_oracle(list(weights.values()), 10)


def test_plan_deterministic():
    rng = random.Random(11)
    weights = {f"r{j:02d}": rng.randint(1, 6) for j in range(15)}
    assert pack_regions(weights, 10) == pack_regions(dict(reversed(list(weights.items()))), 10)


def test_shard_accounts_counts():
    queries = [
        PlacementQuery(("m5.large",), (f"region-{i}",), target_capacity=1) for i in range(120)
    ]
    plan = shard_accounts(queries, 50)
    sizes = [len(qs) for _, qs in plan.assignments]
    assert sizes == [50, 50, 20]
    assert [a for a, _ in plan.assignments] == ["acct-001", "acct-002", "acct-003"]


def test_shard_accounts_paper_count():
    queries = [
        PlacementQuery(("m5.large",), (f"region-{i}",), target_capacity=1) for i in range(2226)
    ]
    plan = shard_accounts(queries, 50)
    assert len(plan.assignments) == 45


def test_shard_accounts_empty():
    plan = shard_accounts([], 50)
    assert plan.assignments == []


def test_shard_accounts_cap_property():
    rng = random.Random(3)
    for _ in range(20):
        n = rng.randint(0, 300)
        limit = rng.randint(1, 60)
        queries = [
            PlacementQuery(("m5.large",), (f"region-{i}",), target_capacity=1) for i in range(n)
        ]
        plan = shard_accounts(queries, limit)
        assert all(len(qs) <= limit for _, qs in plan.assignments)
        assert sum(len(qs) for _, qs in plan.assignments) == n


def test_query_key_ignores_single_az_flag():
    a = PlacementQuery(("m5.large",), ("us-east-1",), 1, single_az=True)
    b = PlacementQuery(("m5.large",), ("us-east-1",), 1, single_az=False)
    assert a.key() == b.key()
    c = PlacementQuery(("m5.large",), ("us-east-1",), 2, single_az=True)
    assert a.key() != c.key()


def test_support_map_and_plan_files_round_trip(tmp_path):
    support = {"m5.large": {"us-east-1": 2, "eu-west-1": 3}, "c5.xlarge": {"us-east-1": 1}}
    sm_path = tmp_path / "support.json"
    save_support_map(support, sm_path)
    assert load_support_map(sm_path) == support

    plan = shard_accounts(plan_queries(support), 1)
    plan_path = tmp_path / "plan.json"
    save_plan(plan, plan_path)
    loaded = load_plan(plan_path)
    assert loaded.all_queries() == plan.all_queries()


def test_support_map_rejects_bad_az_count(tmp_path):
    import json

    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"m5.large": {"us-east-1": 0}}))
    with pytest.raises(ValueError):
        load_support_map(path)
