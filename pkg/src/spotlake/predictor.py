"""Three-class spot outcome prediction from archived score history, plus the
current-value baseline heuristics and evaluation metrics.

The classifier is a seeded bagged-tree ensemble pinned to fixed defaults
(100 trees, Gini impurity, no depth cap, sqrt-of-arity feature subsampling
per split) so results reproduce bit-for-bit.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass

import numpy as np

from .model import Metric, SpotlakeError, Timestamp
from .store import ArchiveStore, SeriesNotFound

FEATURE_NAMES = (
    "spsMean",
    "spsMin",
    "spsLast",
    "spsChanges",
    "ifMean",
    "ifMin",
    "ifLast",
    "ifChanges",
    "savingsCurrent",
)

HISTORY_WINDOW_S = 30 * 24 * 3600

MODEL_FORMAT = "spotlake-forest"
MODEL_VERSION = 1

# Thresholds for the current-value heuristics, chosen empirically on a
# simulator validation split and pinned.
IF_THRESHOLDS = (2.5, 1.5)  # >= hi -> NoInterrupt, >= lo -> Interrupted, else NoFulfill
COSTSAVE_THRESHOLDS = (0.62, 0.78)  # <= lo -> NoInterrupt, <= hi -> Interrupted, else NoFulfill


class NoHistory(SpotlakeError):
    pass


class DegenerateTraining(SpotlakeError):
    pass


def _window_stats(samples: list[tuple[Timestamp, float]]) -> tuple[float, float, float, float] | None:
    if not samples:
        return None
    values = [v for _, v in samples]
    changes = sum(1 for a, b in zip(values, values[1:]) if a != b)
    return (sum(values) / len(values), min(values), values[-1], float(changes))


def featurize(store: ArchiveStore, instance: str, az: str, as_of: Timestamp, region: str | None = None) -> list[float | None]:
    """Aggregates over the preceding month of the pair's series, [as_of-30d, as_of).

    Missing series leave their features as None (imputed at training time);
    raises NoHistory when nothing at all is known for the pair.
    """
    from .model import region_of_az

    region = region or region_of_az(az)
    lo = as_of - HISTORY_WINDOW_S
    hi = as_of - 1
    features: list[float | None] = [None] * len(FEATURE_NAMES)

    def series_window(metric: Metric) -> list[tuple[Timestamp, float]]:
        try:
            samples = store.series_samples((metric.value, instance, region, az))
        except SeriesNotFound:
            return []
        return [(t, v) for t, v in samples if lo <= t <= hi]

    sps = _window_stats(series_window(Metric.PLACEMENT_SCORE))
    if sps is not None:
        features[0:4] = list(sps)
    if_stats = _window_stats(series_window(Metric.INTERRUPTION_FREE))
    if if_stats is not None:
        features[4:8] = list(if_stats)
    savings = series_window(Metric.SAVINGS)
    if savings:
        features[8] = savings[-1][1]

    if all(f is None for f in features):
        raise NoHistory(f"no archived history for ({instance}, {az}) before {as_of}")
    return features


# ---------------------------------------------------------------------------
# Forest

def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.square(p).sum())


def _grow_tree(X: np.ndarray, y: np.ndarray, n_classes: int, n_sub: int, rng: random.Random) -> dict:
    counts = np.bincount(y, minlength=n_classes)
    majority = int(np.argmax(counts))  # argmax ties resolve to the lowest class index
    if counts.max() == counts.sum() or len(y) < 2:
        return {"leaf": majority}

    n_features = X.shape[1]
    feature_ids = sorted(rng.sample(range(n_features), n_sub))
    best_gain = 0.0
    best: tuple[int, float] | None = None
    parent_impurity = _gini(counts)
    total = len(y)
    for f in feature_ids:
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        left = np.zeros(n_classes, dtype=np.int64)
        right = counts.copy()
        for i in range(total - 1):
            c = ys[i]
            left[c] += 1
            right[c] -= 1
            if xs[i + 1] == xs[i]:
                continue
            n_left = i + 1
            n_right = total - n_left
            gain = parent_impurity - (
                n_left / total * _gini(left) + n_right / total * _gini(right)
            )
            if gain > best_gain + 1e-12:
                best_gain = gain
                best = (f, float((xs[i] + xs[i + 1]) / 2.0))
    if best is None:
        return {"leaf": majority}
    f, threshold = best
    mask = X[:, f] <= threshold
    return {
        "f": f,
        "t": threshold,
        "l": _grow_tree(X[mask], y[mask], n_classes, n_sub, rng),
        "r": _grow_tree(X[~mask], y[~mask], n_classes, n_sub, rng),
    }


def _predict_tree(node: dict, x: np.ndarray) -> int:
    while "leaf" not in node:
        node = node["l"] if x[node["f"]] <= node["t"] else node["r"]
    return node["leaf"]


@dataclass
class ForestModel:
    classes: list[str]
    feature_names: list[str]
    medians: list[float]  # per-feature imputation values
    trees: list[dict]

    def impute(self, vector: list[float | None]) -> np.ndarray:
        return np.array(
            [self.medians[i] if v is None else v for i, v in enumerate(vector)], dtype=float
        )

    def predict(self, vector: list[float | None]) -> str:
        x = self.impute(vector)
        votes = np.zeros(len(self.classes), dtype=np.int64)
        for tree in self.trees:
            votes[_predict_tree(tree, x)] += 1
        return self.classes[int(np.argmax(votes))]

    def save(self, path) -> None:
        with open(path, "w") as f:
            json.dump(
                {
                    "format": MODEL_FORMAT,
                    "version": MODEL_VERSION,
                    "classes": self.classes,
                    "featureNames": self.feature_names,
                    "medians": self.medians,
                    "trees": self.trees,
                },
                f,
                separators=(",", ":"),
            )

    @classmethod
    def load(cls, path) -> "ForestModel":
        with open(path) as f:
            obj = json.load(f)
        if obj.get("format") != MODEL_FORMAT or obj.get("version") != MODEL_VERSION:
            raise ValueError(f"not a {MODEL_FORMAT} v{MODEL_VERSION} model file")
        return cls(
            classes=obj["classes"],
            feature_names=obj["featureNames"],
            medians=obj["medians"],
            trees=obj["trees"],
        )


def train(
    features: list[list[float | None]],
    labels: list[str],
    seed: int,
    n_trees: int = 100,
) -> ForestModel:
    """Bagged trees with majority vote; fully seeded, defaults pinned."""
    if len(features) != len(labels) or not features:
        raise ValueError("features and labels must be non-empty and aligned")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise DegenerateTraining(f"training data has a single class {classes}")

    arity = len(FEATURE_NAMES)
    medians: list[float] = []
    for i in range(arity):
        present = sorted(v for vec in features for v in [vec[i]] if v is not None)
        medians.append(present[len(present) // 2] if present else 0.0)

    X = np.array(
        [[medians[i] if v is None else v for i, v in enumerate(vec)] for vec in features],
        dtype=float,
    )
    y = np.array([classes.index(l) for l in labels], dtype=np.int64)
    n = len(y)
    n_sub = max(1, int(math.sqrt(arity)))

    trees = []
    for t in range(n_trees):
        rng = random.Random((seed * 1_000_003 + t) & 0xFFFFFFFF)
        idx = np.array([rng.randrange(n) for _ in range(n)], dtype=np.int64)
        trees.append(_grow_tree(X[idx], y[idx], len(classes), n_sub, rng))
    return ForestModel(
        classes=classes,
        feature_names=list(FEATURE_NAMES),
        medians=medians,
        trees=trees,
    )


# ---------------------------------------------------------------------------
# Baselines

def baseline_predict(
    kind: str,
    current: dict[str, float],
    thresholds: tuple[float, float] | None = None,
) -> str:
    """Current-value heuristics.

    SPS: 3.0 -> NoInterrupt, 2.0 -> Interrupted, 1.0 -> NoFulfill.
    IF / CostSave: two-threshold rules with pinned defaults.
    """
    if kind == "SPS":
        value = current["sps"]
        mapping = {3.0: "NoInterrupt", 2.0: "Interrupted", 1.0: "NoFulfill"}
        if value not in mapping:
            raise ValueError(f"SPS baseline needs a score in {{1.0, 2.0, 3.0}}, got {value}")
        return mapping[value]
    if kind == "IF":
        hi, lo = thresholds or IF_THRESHOLDS
        value = current["if"]
        if value >= hi:
            return "NoInterrupt"
        if value >= lo:
            return "Interrupted"
        return "NoFulfill"
    if kind == "CostSave":
        lo, hi = thresholds or COSTSAVE_THRESHOLDS
        value = current["savings"]
        if value <= lo:
            return "NoInterrupt"
        if value <= hi:
            return "Interrupted"
        return "NoFulfill"
    raise ValueError(f"unknown baseline kind {kind!r}")


# ---------------------------------------------------------------------------
# Evaluation

@dataclass
class EvalResult:
    accuracy: float
    macro_f1: float
    classes: list[str]
    confusion: dict[str, dict[str, int]]  # truth -> prediction -> count

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macroF1": self.macro_f1,
            "classes": self.classes,
            "confusion": self.confusion,
        }


def evaluate(predictions: list[str], truths: list[str]) -> EvalResult:
    """Accuracy and macro-F1 (classes absent from both sides excluded)."""
    if len(predictions) != len(truths) or not truths:
        raise ValueError("predictions and truths must be non-empty and aligned")
    classes = sorted(set(truths) | set(predictions))
    confusion: dict[str, dict[str, int]] = {t: {p: 0 for p in classes} for t in classes}
    correct = 0
    for pred, truth in zip(predictions, truths):
        confusion[truth][pred] += 1
        if pred == truth:
            correct += 1
    f1s = []
    for cls in classes:
        tp = confusion[cls][cls]
        fn = sum(confusion[cls][p] for p in classes) - tp
        fp = sum(confusion[t][cls] for t in classes) - tp
        if tp == fn == fp == 0:
            continue  # class absent from both truth and prediction
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        f1s.append(f1)
    return EvalResult(
        accuracy=correct / len(truths),
        macro_f1=sum(f1s) / len(f1s) if f1s else 0.0,
        classes=classes,
        confusion=confusion,
    )


def stratified_split(
    labels: list[str], test_fraction: float, seed: int
) -> tuple[list[int], list[int]]:
    """Seeded per-label split into train/test index lists."""
    by_label: dict[str, list[int]] = {}
    for i, label in enumerate(labels):
        by_label.setdefault(label, []).append(i)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_label):
        members = by_label[label][:]
        rng = random.Random(seed + sum(ord(c) for c in label))
        rng.shuffle(members)
        n_test = int(round(len(members) * test_fraction))
        test_idx.extend(members[:n_test])
        train_idx.extend(members[n_test:])
    return sorted(train_idx), sorted(test_idx)
