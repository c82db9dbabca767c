import random

import pytest

from spotlake.model import ArchiveRecord, Metric, parse_rfc3339
from spotlake.predictor import (
    COSTSAVE_THRESHOLDS,
    DegenerateTraining,
    FEATURE_NAMES,
    ForestModel,
    IF_THRESHOLDS,
    NoHistory,
    baseline_predict,
    evaluate,
    featurize,
    stratified_split,
    train,
)
from spotlake.store import ArchiveStore

T0 = parse_rfc3339("2022-02-01T00:00:00Z")
MIN10 = 600


def history_store(sps_values, if_values=None, savings=None) -> ArchiveStore:
    store = ArchiveStore(None)
    batch = []
    for i, v in enumerate(sps_values):
        batch.append(
            ArchiveRecord(T0 + i * MIN10, "m5.large", "us-east-1", "us-east-1a", Metric.PLACEMENT_SCORE, v)
        )
    for i, v in enumerate(if_values or []):
        batch.append(
            ArchiveRecord(T0 + i * MIN10, "m5.large", "us-east-1", None, Metric.INTERRUPTION_FREE, v)
        )
    for i, v in enumerate(savings or []):
        batch.append(
            ArchiveRecord(T0 + i * MIN10, "m5.large", "us-east-1", None, Metric.SAVINGS, v)
        )
    store.append(batch)
    return store


def test_featurize_constant_month():
    store = history_store([3.0] * 100, [2.5] * 100, [0.6] * 100)
    as_of = T0 + 100 * MIN10
    vec = featurize(store, "m5.large", "us-east-1a", as_of)
    named = dict(zip(FEATURE_NAMES, vec))
    assert named["spsMean"] == 3.0
    assert named["spsMin"] == 3.0
    assert named["spsLast"] == 3.0
    assert named["spsChanges"] == 0.0
    assert named["ifMean"] == 2.5
    assert named["savingsCurrent"] == 0.6


def test_featurize_mixed_series():
    store = history_store([3.0, 3.0, 1.0])
    vec = featurize(store, "m5.large", "us-east-1a", T0 + 3 * MIN10)
    named = dict(zip(FEATURE_NAMES, vec))
    assert named["spsMean"] == pytest.approx(7.0 / 3.0)
    assert named["spsMin"] == 1.0
    assert named["spsLast"] == 1.0
    assert named["spsChanges"] == 1.0
    assert named["ifMean"] is None  # missing series stays missing


def test_featurize_window_excludes_as_of_and_old_samples():
    store = history_store([3.0] * 5)
    # sample exactly at as_of is excluded
    vec = featurize(store, "m5.large", "us-east-1a", T0 + 4 * MIN10)
    assert dict(zip(FEATURE_NAMES, vec))["spsMean"] == 3.0
    month = 30 * 24 * 3600
    vec2 = featurize(store, "m5.large", "us-east-1a", T0 + 2 * MIN10 + month)
    named = dict(zip(FEATURE_NAMES, vec2))
    assert named["spsMean"] == 3.0  # only the in-window tail remains


def test_featurize_no_history():
    store = ArchiveStore(None)
    with pytest.raises(NoHistory):
        featurize(store, "m5.large", "us-east-1a", T0)


def separable_dataset(n=60, seed=0):
    rng = random.Random(seed)
    features, labels = [], []
    for _ in range(n):
        cls = rng.choice(["NoInterrupt", "Interrupted", "NoFulfill"])
        base = {"NoInterrupt": 3.0, "Interrupted": 2.0, "NoFulfill": 1.0}[cls]
        vec = [base, base, base, 0.0, base, base, base, 0.0, 0.5]
        features.append(vec)
        labels.append(cls)
    return features, labels


def test_train_memorizes_separable_data():
    features, labels = separable_dataset()
    model = train(features, labels, seed=5)
    assert all(model.predict(vec) == label for vec, label in zip(features, labels))


def test_train_rejects_single_class():
    features = [[1.0] * 9, [2.0] * 9]
    with pytest.raises(DegenerateTraining):
        train(features, ["NoInterrupt", "NoInterrupt"], seed=1)


def test_train_deterministic():
    features, labels = separable_dataset(n=80, seed=3)
    rng = random.Random(10)
    probes = [[rng.uniform(1, 3) for _ in range(9)] for _ in range(30)]
    m1 = train(features, labels, seed=9)
    m2 = train(features, labels, seed=9)
    assert [m1.predict(p) for p in probes] == [m2.predict(p) for p in probes]


def test_model_save_load_round_trip(tmp_path):
    features, labels = separable_dataset(n=40, seed=2)
    model = train(features, labels, seed=4)
    path = tmp_path / "model.json"
    model.save(path)
    loaded = ForestModel.load(path)
    assert loaded.classes == model.classes
    assert [loaded.predict(v) for v in features] == [model.predict(v) for v in features]
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        ForestModel.load(bad)


def test_imputation_uses_training_median():
    features = [[1.0] * 9, [2.0] * 9, [None] + [1.5] * 8, [3.0] * 9]
    labels = ["A", "B", "A", "B"]
    model = train(features, labels, seed=1)
    assert model.medians[0] == 2.0  # median of the present values {1.0, 2.0, 3.0}
    assert model.predict([None] * 9) in ("A", "B")


def test_baseline_sps_rule_exact():
    assert baseline_predict("SPS", {"sps": 3.0}) == "NoInterrupt"
    assert baseline_predict("SPS", {"sps": 2.0}) == "Interrupted"
    assert baseline_predict("SPS", {"sps": 1.0}) == "NoFulfill"
    with pytest.raises(ValueError):
        baseline_predict("SPS", {"sps": 2.5})


def test_baseline_if_thresholds():
    hi, lo = IF_THRESHOLDS
    assert baseline_predict("IF", {"if": hi}) == "NoInterrupt"
    assert baseline_predict("IF", {"if": 2.5}) == "NoInterrupt"
    assert baseline_predict("IF", {"if": 2.0}) == "Interrupted"
    assert baseline_predict("IF", {"if": 1.0}) == "NoFulfill"
    assert baseline_predict("IF", {"if": 3.0}, thresholds=(3.0, 1.0)) == "NoInterrupt"


def test_baseline_costsave_thresholds():
    lo, hi = COSTSAVE_THRESHOLDS
    assert baseline_predict("CostSave", {"savings": lo - 0.01}) == "NoInterrupt"
    assert baseline_predict("CostSave", {"savings": (lo + hi) / 2}) == "Interrupted"
    assert baseline_predict("CostSave", {"savings": hi + 0.01}) == "NoFulfill"
    with pytest.raises(ValueError):
        baseline_predict("nope", {"sps": 3.0})


def test_evaluate_simple_accuracy():
    res = evaluate(["a", "a", "b"], ["a", "b", "b"])
    assert res.accuracy == pytest.approx(2 / 3)


def test_evaluate_perfect():
    res = evaluate(["a", "b", "c"], ["a", "b", "c"])
    assert res.accuracy == 1.0
    assert res.macro_f1 == 1.0


def test_evaluate_hand_computed_macro_f1():
    # A: precision 1, recall 1/2 -> F1 2/3; B: precision 1/2, recall 1 -> 2/3; C: 1
    res = evaluate(["A", "B", "B", "C"], ["A", "A", "B", "C"])
    assert res.accuracy == pytest.approx(0.75)
    assert res.macro_f1 == pytest.approx((2 / 3 + 2 / 3 + 1.0) / 3)


def test_evaluate_confusion_row_sums():
    truths = ["A", "A", "B", "C", "C", "C"]
    preds = ["B", "A", "B", "C", "A", "C"]
    res = evaluate(preds, truths)
    for cls in res.classes:
        assert sum(res.confusion[cls].values()) == truths.count(cls)


def test_evaluate_excludes_absent_classes():
    res = evaluate(["a", "a"], ["a", "a"])
    assert res.macro_f1 == 1.0  # only class 'a' participates


def test_stratified_split_properties():
    labels = ["A"] * 70 + ["B"] * 30
    train_idx, test_idx = stratified_split(labels, 0.3, seed=8)
    assert sorted(train_idx + test_idx) == list(range(100))
    assert len(test_idx) == 30
    assert sum(1 for i in test_idx if labels[i] == "A") == 21
    assert stratified_split(labels, 0.3, seed=8) == (train_idx, test_idx)
    assert stratified_split(labels, 0.3, seed=9) != (train_idx, test_idx)
