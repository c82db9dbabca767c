import math
import random
from pathlib import Path

import pytest

from spotlake.analysis import (
    AlignedSeriesPair,
    LengthMismatch,
    aggregate_heatmap,
    correlation_cdf,
    group_by_size,
    pearson,
    score_difference_histogram,
    update_frequency_cdf,
    value_distribution,
)
from spotlake.model import ArchiveRecord, Metric, OutOfBandScore, parse_rfc3339
from spotlake.store import ArchiveStore

T0 = parse_rfc3339("2022-01-01T00:00:00Z")
MIN10 = 600

FIXTURE = Path(__file__).parent.parent / "src" / "spotlake" / "fixtures" / "fixture_archive.jsonl"


def fixture_store() -> ArchiveStore:
    store = ArchiveStore(None)
    with open(FIXTURE) as f:
        store.import_records(f)
    return store


def series_store(spec: dict) -> ArchiveStore:
    """spec: (instance, az or None, metric) -> list of values at 10-min ticks."""
    store = ArchiveStore(None)
    batch = []
    for (instance, az, metric), values in spec.items():
        region = az[: -1] if az else "us-east-1"
        for i, v in enumerate(values):
            batch.append(ArchiveRecord(T0 + i * MIN10, instance, region, az, metric, v))
    store.append(batch)
    return store


def two_pass_pearson_oracle(xs, ys):
    """Straight transcription of the correlation formula, two explicit passes."""
    n = len(xs)
    x_bar = sum(xs) / n
    y_bar = sum(ys) / n
    num = sum((x - x_bar) * (y - y_bar) for x, y in zip(xs, ys))
    den = math.sqrt(sum((x - x_bar) ** 2 for x in xs)) * math.sqrt(
        sum((y - y_bar) ** 2 for y in ys)
    )
    if den == 0.0:
        return None
    return num / den


def test_pearson_perfect_correlation():
    assert pearson(AlignedSeriesPair((1, 2, 3), (1, 2, 3))) == pytest.approx(1.0)


def test_pearson_perfect_anticorrelation():
    assert pearson(AlignedSeriesPair((1, 2, 3), (3, 2, 1))) == pytest.approx(-1.0)


def test_pearson_hand_computed_example():
    # deviations X: -1.5,-0.5,0.5,1.5 / Y: -1.5,0.5,-0.5,1.5 -> 4.0 / (sqrt5*sqrt5)
    assert pearson(AlignedSeriesPair((1, 2, 3, 4), (1, 3, 2, 4))) == pytest.approx(0.8, abs=1e-12)


def test_pearson_zero_variance_undefined():
    assert pearson(AlignedSeriesPair((2, 2, 2), (1, 2, 3))) is None
    assert pearson(AlignedSeriesPair((1, 2, 3), (5, 5, 5))) is None


def test_pearson_length_checks():
    with pytest.raises(LengthMismatch):
        AlignedSeriesPair((1, 2), (1, 2, 3))
    with pytest.raises(LengthMismatch):
        AlignedSeriesPair((1,), (1,))


def test_pearson_matches_independent_oracle():
    rng = random.Random(1234)
    for _ in range(1000):
        n = rng.randint(2, 40)
        xs = tuple(rng.uniform(-10, 10) for _ in range(n))
        ys = tuple(rng.uniform(-10, 10) for _ in range(n))
        got = pearson(AlignedSeriesPair(xs, ys))
        want = two_pass_pearson_oracle(xs, ys)
        if want is None:
            assert got is None
        else:
            assert got == pytest.approx(want, abs=1e-12)


def test_pearson_symmetry_and_affine_invariance():
    rng = random.Random(77)
    for _ in range(200):
        n = rng.randint(3, 30)
        xs = tuple(rng.uniform(0, 5) for _ in range(n))
        ys = tuple(rng.uniform(0, 5) for _ in range(n))
        r_xy = pearson(AlignedSeriesPair(xs, ys))
        r_yx = pearson(AlignedSeriesPair(ys, xs))
        if r_xy is None:
            assert r_yx is None
            continue
        assert r_xy == pytest.approx(r_yx, abs=1e-12)
        a, b = rng.uniform(0.1, 9.0), rng.uniform(-4, 4)
        scaled = tuple(a * x + b for x in xs)
        assert pearson(AlignedSeriesPair(scaled, ys)) == pytest.approx(r_xy, abs=1e-9)


def test_value_distribution_counting():
    store = series_store({("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [3.0, 3.0, 3.0, 1.0]})
    hist = value_distribution(store, Metric.PLACEMENT_SCORE)
    fracs = hist.fractions()
    assert fracs[3.0] == pytest.approx(0.75)
    assert fracs[1.0] == pytest.approx(0.25)
    assert fracs[1.5] == 0.0 and fracs[2.5] == 0.0
    assert sum(fracs.values()) == pytest.approx(1.0, abs=1e-9)
    assert hist.total == 4


def test_value_distribution_empty_and_errors():
    store = ArchiveStore(None)
    hist = value_distribution(store, Metric.INTERRUPTION_FREE)
    assert hist.total == 0
    assert all(v == 0.0 for v in hist.fractions().values())
    with pytest.raises(ValueError):
        value_distribution(store, Metric.SPOT_PRICE)


def test_value_distribution_rejects_composite_scores():
    store = series_store({("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [7.0]})
    with pytest.raises(OutOfBandScore):
        value_distribution(store, Metric.PLACEMENT_SCORE)


def test_reference_distribution_fixture():
    import json

    ref_path = FIXTURE.parent / "reference_distribution.json"
    ref = json.loads(ref_path.read_text())
    sps = ref["placementScore"]
    assert sps["3.0"] == pytest.approx(0.8788)
    assert sps["2.0"] == pytest.approx(0.0381)
    assert sps["1.0"] == pytest.approx(0.0831)
    assert sps["2.5"] is None and sps["1.5"] is None
    if_ = ref["interruptionFree"]
    assert sum(v for v in if_.values() if v is not None) == pytest.approx(1.0, abs=1e-9)


def test_score_difference_histogram_fixture():
    store = fixture_store()
    diff = score_difference_histogram(store)
    # pair A: |[3,3,2,2,3] - 2.0| -> [1,1,0,0,1]; pair B: |3 - 1.0| x5 -> [2]*5
    assert diff.histogram.total == 10
    fracs = diff.histogram.fractions()
    assert fracs[0.0] == pytest.approx(0.2)
    assert fracs[1.0] == pytest.approx(0.3)
    assert fracs[2.0] == pytest.approx(0.5)
    assert diff.fraction_at_2 == pytest.approx(0.5)
    assert diff.fraction_ge_1_5 == pytest.approx(0.5)


def test_score_difference_half_step():
    store = series_store(
        {
            ("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [3.0, 2.0],
            ("m5.large", None, Metric.INTERRUPTION_FREE): [2.5, 2.0],
        }
    )
    diff = score_difference_histogram(store)
    fracs = diff.histogram.fractions()
    assert fracs[0.5] == pytest.approx(0.5)
    assert fracs[0.0] == pytest.approx(0.5)


def test_update_frequency_gaps():
    store = series_store(
        {("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [1.0, 2.0, 1.0, 2.0, 1.0]}
    )
    cdf = update_frequency_cdf(store, Metric.PLACEMENT_SCORE)
    assert cdf.gaps_hours == [600 / 3600.0] * 3
    assert cdf.median() == pytest.approx(1 / 6)


def test_update_frequency_constant_contributes_nothing():
    store = series_store(
        {
            ("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [2.0] * 6,
            ("c5.xlarge", "us-east-1a", Metric.PLACEMENT_SCORE): [1.0, 3.0, 1.0],
        }
    )
    cdf = update_frequency_cdf(store, Metric.PLACEMENT_SCORE)
    assert len(cdf.gaps_hours) == 1
    assert cdf.series_count == 2


def test_correlation_cdf_identical_series():
    store = series_store(
        {
            ("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [1.0, 2.0, 3.0, 1.0],
            ("m5.large", None, Metric.INTERRUPTION_FREE): [1.0, 2.0, 3.0, 1.0],
            ("c5.xlarge", "us-east-1b", Metric.PLACEMENT_SCORE): [3.0, 1.0, 2.0, 2.0],
            ("c5.xlarge", None, Metric.INTERRUPTION_FREE): [3.0, 1.0, 2.0, 2.0],
        }
    )
    cdf = correlation_cdf(store, Metric.PLACEMENT_SCORE, Metric.INTERRUPTION_FREE)
    assert cdf.pairs_total == 2
    assert cdf.excluded == 0
    assert cdf.coefficients == pytest.approx([1.0, 1.0])
    assert cdf.fraction_abs_below(0.5) == 0.0


def test_correlation_cdf_constant_series_excluded():
    store = series_store(
        {
            ("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [1.0, 2.0, 3.0],
            ("m5.large", None, Metric.INTERRUPTION_FREE): [2.0, 2.0, 2.0],
        }
    )
    cdf = correlation_cdf(store, Metric.PLACEMENT_SCORE, Metric.INTERRUPTION_FREE)
    assert cdf.pairs_total == 1
    assert cdf.excluded == 1
    assert cdf.coefficients == []


def test_heatmap_day_means():
    day = 24 * 3600
    store = ArchiveStore(None)
    store.append(
        [
            ArchiveRecord(T0, "m5.large", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, 3.0),
            ArchiveRecord(T0 + day, "m5.large", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, 1.0),
        ]
    )
    grid = aggregate_heatmap(store, "familyClass", "dayIndex", Metric.PLACEMENT_SCORE)
    assert grid.rows == ["general"]
    assert grid.cols == ["0", "1"]
    assert grid.cells == [[3.0, 1.0]]


def test_heatmap_unsupported_cells_na():
    store = ArchiveStore(None)
    store.append(
        [
            ArchiveRecord(T0, "m5.large", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, 3.0),
            ArchiveRecord(T0, "g4dn.xlarge", "eu-west-1", "eu-west-1a", Metric.PLACEMENT_SCORE, 1.0),
        ]
    )
    grid = aggregate_heatmap(store, "familyClass", "region", Metric.PLACEMENT_SCORE)
    assert grid.rows == ["general", "accelerated-computing"]
    assert grid.cols == ["eu-west-1", "us-east-1"]
    assert grid.cells == [[None, 3.0], [1.0, None]]


def test_heatmap_uniform_archive_constant():
    store = series_store(
        {
            ("m5.large", "us-east-1a", Metric.PLACEMENT_SCORE): [2.0] * 4,
            ("c5.xlarge", "us-east-1a", Metric.PLACEMENT_SCORE): [2.0] * 4,
        }
    )
    grid = aggregate_heatmap(store, "family", "region", Metric.PLACEMENT_SCORE)
    assert all(v == 2.0 for row in grid.cells for v in row)
    assert grid.rows == ["m5", "c5"]  # general before compute-optimized


def test_group_by_size_threshold():
    store = ArchiveStore(None)
    batch = []
    for i in range(12):
        batch.append(
            ArchiveRecord(T0, f"m{i}.xlarge", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, 3.0)
        )
    for i in range(2):
        batch.append(
            ArchiveRecord(T0, f"c{i}.metal", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, 1.0)
        )
    store.append(batch)
    rows = group_by_size(store, Metric.PLACEMENT_SCORE, min_types_per_size=10)
    assert [r.size for r in rows] == ["xlarge"]
    assert rows[0].type_count == 12


def test_group_by_size_mean_and_monotone_fixture():
    store = ArchiveStore(None)
    batch = []
    # larger sizes built with strictly lower scores
    for size, score in (("large", 3.0), ("xlarge", 2.0), ("2xlarge", 1.0)):
        for i in range(3):
            batch.append(
                ArchiveRecord(T0, f"m{i}.{size}", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, score)
            )
    batch.append(ArchiveRecord(T0, "r9.large", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, 1.0))
    store.append(batch)
    rows = group_by_size(store, Metric.PLACEMENT_SCORE, min_types_per_size=3)
    assert [r.size for r in rows] == ["large", "xlarge", "2xlarge"]
    assert rows[0].mean_score == pytest.approx((3.0 * 3 + 1.0) / 4)
    means = [r.mean_score for r in rows]
    assert all(a >= b for a, b in zip(means, means[1:]))
