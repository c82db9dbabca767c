import io
import random

import pytest

from spotlake.model import ArchiveRecord, Metric, parse_rfc3339
from spotlake.store import ArchiveStore, CorruptBatch, RangeInverted, SeriesNotFound

T0 = parse_rfc3339("2022-01-01T00:00:00Z")
MIN10 = 600


def rec(ts, instance="m5.large", region="us-east-1", az="us-east-1a",
        metric=Metric.PLACEMENT_SCORE, value=3.0):
    return ArchiveRecord(ts, instance, region, az, metric, value)


def tsrange(n, start=T0, step=MIN10):
    return [start + i * step for i in range(n)]


def test_append_fresh_then_duplicate_batches():
    store = ArchiveStore(None)
    batch = [rec(t) for t in tsrange(10)]
    assert store.append(batch) == 10
    assert store.append(batch) == 0
    mixed = [rec(t) for t in tsrange(15)]
    assert store.append(mixed) == 5


def test_append_then_query_round_trip():
    rng = random.Random(5)
    store = ArchiveStore(None)
    batch = []
    for i in range(200):
        batch.append(
            rec(
                T0 + rng.randint(0, 100) * MIN10,
                instance=rng.choice(["m5.large", "c5.xlarge"]),
                az=rng.choice(["us-east-1a", "us-east-1b"]),
                value=float(rng.randint(1, 3)),
            )
        )
    accepted = store.append(batch)
    got = store.query(T0, T0 + 101 * MIN10)
    assert len(got) == accepted
    assert sorted((r.key(), r.ts) for r in got) == sorted(
        set((r.key(), r.ts) for r in batch)
    )
    assert got == sorted(got, key=lambda r: (r.key(), r.ts))


def test_query_wildcard_az_union():
    store = ArchiveStore(None)
    for az in ("us-east-1a", "us-east-1b", "us-east-1c"):
        store.append([rec(t, az=az) for t in tsrange(3)])
    got = store.query(T0, T0 + 10 * MIN10)
    assert len(got) == 9
    assert {r.az for r in got} == {"us-east-1a", "us-east-1b", "us-east-1c"}


def test_query_empty_range_and_inverted():
    store = ArchiveStore(None)
    store.append([rec(T0)])
    assert store.query(T0 + 1, T0 + 2) == []
    with pytest.raises(RangeInverted):
        store.query(T0 + 2, T0 + 1)


def test_query_filters():
    store = ArchiveStore(None)
    store.append(
        [
            rec(T0, instance="m5.large", az="us-east-1a"),
            rec(T0, instance="c5.xlarge", az="us-east-1b"),
            rec(T0, instance="m5.large", region="eu-west-1", az="eu-west-1a"),
        ]
    )
    assert len(store.query(T0, T0, instances=["m5.large"])) == 2
    assert len(store.query(T0, T0, regions=["eu-west-1"])) == 1
    assert len(store.query(T0, T0, azs=["us-east-1b"])) == 1
    assert len(store.query(T0, T0, metrics=[Metric.SPOT_PRICE])) == 0


def test_region_level_rows_match_az_filter():
    store = ArchiveStore(None)
    store.append([rec(T0, metric=Metric.INTERRUPTION_FREE, az=None, value=2.5)])
    got = store.query(T0, T0, azs=["us-east-1b"])
    assert len(got) == 1
    assert got[0].az is None
    assert store.query(T0, T0, azs=["eu-west-1a"]) == []


def test_change_events_hand_trace():
    store = ArchiveStore(None)
    values = [3, 3, 2, 2, 3]
    store.append([rec(t, value=float(v)) for t, v in zip(tsrange(5), values)])
    key = (Metric.PLACEMENT_SCORE.value, "m5.large", "us-east-1", "us-east-1a")
    events = store.change_events(key)
    assert len(events) == 2
    assert events[0].at == T0 + 2 * MIN10
    assert (events[0].old_value, events[0].new_value) == (3.0, 2.0)
    assert events[1].at == T0 + 4 * MIN10
    assert events[1].at - events[0].at == 20 * 60


def test_change_events_constant_and_single():
    store = ArchiveStore(None)
    store.append([rec(t, value=2.0) for t in tsrange(4)])
    key = (Metric.PLACEMENT_SCORE.value, "m5.large", "us-east-1", "us-east-1a")
    assert store.change_events(key) == []

    store2 = ArchiveStore(None)
    store2.append([rec(T0)])
    key2 = (Metric.PLACEMENT_SCORE.value, "m5.large", "us-east-1", "us-east-1a")
    assert store2.change_events(key2) == []
    with pytest.raises(SeriesNotFound):
        store2.change_events((Metric.PLACEMENT_SCORE.value, "x1e.xlarge", "us-east-1", "us-east-1a"))


def test_change_events_bound_distinct_values():
    rng = random.Random(17)
    for _ in range(30):
        store = ArchiveStore(None)
        values = [float(rng.randint(1, 3)) for _ in range(rng.randint(1, 40))]
        store.append([rec(t, value=v) for t, v in zip(tsrange(len(values)), values)])
        key = (Metric.PLACEMENT_SCORE.value, "m5.large", "us-east-1", "us-east-1a")
        events = store.change_events(key)
        assert len(events) + 1 >= len(set(values))
        gaps = [b.at - a.at for a, b in zip(events, events[1:])]
        assert all(g > 0 for g in gaps)


def test_change_events_resolve_region_series():
    store = ArchiveStore(None)
    store.append(
        [
            rec(t, metric=Metric.INTERRUPTION_FREE, az=None, value=v)
            for t, v in zip(tsrange(3), [3.0, 1.0, 1.0])
        ]
    )
    key = (Metric.INTERRUPTION_FREE.value, "m5.large", "us-east-1", "us-east-1a")
    events = store.change_events(key)
    assert len(events) == 1


def test_resample_ffill_step_function():
    store = ArchiveStore(None)
    store.append(
        [
            rec(T0, metric=Metric.SPOT_PRICE, value=0.031),
            rec(T0 + 25 * 60, metric=Metric.SPOT_PRICE, value=0.034),
        ]
    )
    key = (Metric.SPOT_PRICE.value, "m5.large", "us-east-1", "us-east-1a")
    out = store.resample_ffill(key, MIN10, T0, T0 + 40 * 60)
    assert out == [
        (T0, 0.031),
        (T0 + 600, 0.031),
        (T0 + 1200, 0.031),
        (T0 + 1800, 0.034),
        (T0 + 2400, 0.034),
    ]


def test_resample_ffill_identity_and_tail():
    store = ArchiveStore(None)
    values = [1.0, 2.0, 3.0]
    store.append([rec(t, value=v) for t, v in zip(tsrange(3), values)])
    key = (Metric.PLACEMENT_SCORE.value, "m5.large", "us-east-1", "us-east-1a")
    assert store.resample_ffill(key, MIN10, T0, T0 + 2 * MIN10) == [
        (T0, 1.0),
        (T0 + MIN10, 2.0),
        (T0 + 2 * MIN10, 3.0),
    ]
    # beyond the last sample the latest value holds
    tail = store.resample_ffill(key, MIN10, T0 + 3 * MIN10, T0 + 5 * MIN10)
    assert tail == [(T0 + 3 * MIN10, 3.0), (T0 + 4 * MIN10, 3.0), (T0 + 5 * MIN10, 3.0)]
    # grid points before the first sample are absent
    early = store.resample_ffill(key, MIN10, T0 - 2 * MIN10, T0)
    assert early == [(T0, 1.0)]


def test_persistence_round_trip(tmp_path):
    store = ArchiveStore(tmp_path / "arch")
    batch = [rec(t, value=float(1 + (i % 3))) for i, t in enumerate(tsrange(50))]
    batch += [rec(t, metric=Metric.INTERRUPTION_FREE, az=None, value=2.5) for t in tsrange(5)]
    store.append(batch)
    version = store.version

    reopened = ArchiveStore(tmp_path / "arch")
    assert reopened.version == version
    assert reopened.query(T0, T0 + 100 * MIN10) == store.query(T0, T0 + 100 * MIN10)


def test_torn_batch_invisible_after_reopen(tmp_path):
    store = ArchiveStore(tmp_path / "arch")
    store.append([rec(T0)])
    # rows written without a commit record must vanish on reopen
    seg = next((tmp_path / "arch" / "segments").glob("*.jsonl"))
    with open(seg, "a") as f:
        f.write('{"s":99,"t":%d,"i":"m5.large","r":"us-east-1","a":"us-east-1b","m":"placementScore","v":2.0}\n' % (T0 + 600))
        f.write('{"s":99,"t":%d,"i":"m5.large","r":"us-east-1"')  # torn tail

    reopened = ArchiveStore(tmp_path / "arch")
    assert reopened.count() == 1


def test_import_corrupt_batch_rejected():
    store = ArchiveStore(None)
    good = '{"ts":"2022-01-01T00:00:00Z","instance":"m5.large","region":"us-east-1","az":"us-east-1a","metric":"placementScore","value":3}'
    bad = '{"ts":"2022-01-01T00:10:00Z","instance":"m5.large"}'
    with pytest.raises(CorruptBatch):
        store.import_records(io.StringIO(good + "\n" + bad + "\n"))
    assert store.count() == 0


def test_export_import_round_trip():
    rng = random.Random(9)
    store = ArchiveStore(None)
    batch = []
    for i in range(100):
        metric = rng.choice([Metric.PLACEMENT_SCORE, Metric.INTERRUPTION_FREE, Metric.SPOT_PRICE])
        az = None if metric is Metric.INTERRUPTION_FREE else "us-east-1a"
        value = {"placementScore": 2.0, "interruptionFree": 2.5, "spotPrice": 0.12}[metric.value]
        batch.append(rec(T0 + i * MIN10, metric=metric, az=az, value=value))
    store.append(batch)

    buf = io.StringIO()
    n = store.export_records(buf)
    assert n == store.count()

    buf.seek(0)
    merged = ArchiveStore(None)
    assert merged.import_records(buf) == n
    assert merged.query(T0, T0 + 200 * MIN10) == store.query(T0, T0 + 200 * MIN10)


def test_snapshot_by_version():
    store = ArchiveStore(None)
    store.append([rec(T0)])
    v1 = store.version
    store.append([rec(T0 + MIN10)])
    assert len(store.query(T0, T0 + MIN10, max_version=v1)) == 1
    assert len(store.query(T0, T0 + MIN10)) == 2


def test_span_and_dimensions():
    store = ArchiveStore(None)
    assert store.span() is None
    store.append(
        [
            rec(T0 + 5),
            rec(T0, instance="c5.xlarge", az="us-east-1b"),
            rec(T0 + 99, metric=Metric.INTERRUPTION_FREE, az=None, value=1.5),
        ]
    )
    assert store.span() == (T0, T0 + 99)
    dims = store.dimensions()
    assert dims["instances"] == ["c5.xlarge", "m5.large"]
    assert dims["azs"] == ["us-east-1a", "us-east-1b"]
    assert dims["metrics"] == ["interruptionFree", "placementScore"]
