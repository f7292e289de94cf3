"""Seeded random-forest classifier over maintenance feature vectors.

CART trees, Gini splits, bootstrap resampling, sqrt-feature sampling per
split. Everything is driven by numpy Generators derived from the configured
seed (tree i uses seed + i), so a (dataset, hyperparams, seed) triple fully
determines the serialized model, byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SchemaMismatchError, TrainingError, ValidationError
from .features import (
    FEATURE_NAMES,
    LABEL_ORDER,
    SCHEMA_VERSION,
    FeatureVector,
    LabelDistribution,
    LabeledDataset,
    MaintenanceLabel,
)

N_CLASSES = len(LABEL_ORDER)


@dataclass(frozen=True)
class ForestHyperparams:
    n_trees: int = 100
    max_depth: int = 16
    min_samples_leaf: int = 1
    features_per_split: int | None = None  # None: ceil(sqrt(n_features))
    seed: int = 0

    def resolved_features_per_split(self, n_features: int) -> int:
        if self.features_per_split is not None:
            return min(self.features_per_split, n_features)
        return min(math.ceil(math.sqrt(n_features)), n_features)


DEFAULT_HYPERPARAMS = ForestHyperparams()


def _gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.dot(p, p))


class _TreeBuilder:
    """Grows one CART tree on a bootstrap sample; deterministic given its rng."""

    def __init__(self, x: np.ndarray, y: np.ndarray, hp: ForestHyperparams, rng: np.random.Generator):
        self.x = x
        self.y = y
        self.hp = hp
        self.rng = rng
        self.m = hp.resolved_features_per_split(x.shape[1])
        self.n_root = len(y)

    def build(self) -> dict:
        idx = self.rng.integers(0, len(self.y), len(self.y))  # bootstrap, with replacement
        return self._grow(idx, depth=0)

    def _leaf(self, idx: np.ndarray) -> dict:
        votes = np.bincount(self.y[idx], minlength=N_CLASSES)
        return {"votes": [int(v) for v in votes]}

    def _grow(self, idx: np.ndarray, depth: int) -> dict:
        labels = self.y[idx]
        if (
            depth >= self.hp.max_depth
            or len(idx) < 2 * self.hp.min_samples_leaf
            or np.all(labels == labels[0])
        ):
            return self._leaf(idx)
        split = self._best_split(idx)
        if split is None:
            return self._leaf(idx)
        feature, threshold = split
        mask = self.x[idx, feature] <= threshold
        left = idx[mask]
        right = idx[~mask]
        return {
            "feature": int(feature),
            "threshold": float(threshold),
            "left": self._grow(left, depth + 1),
            "right": self._grow(right, depth + 1),
        }

    def _best_split(self, idx: np.ndarray) -> tuple[int, float] | None:
        n = len(idx)
        sampled = np.sort(self.rng.choice(self.x.shape[1], size=self.m, replace=False))
        onehot = np.eye(N_CLASSES)[self.y[idx]]
        best: tuple[float, int, float] | None = None  # (weighted gini, feature, threshold)
        for feature in sampled:
            values = self.x[idx, feature]
            order = np.argsort(values, kind="stable")
            sv = values[order]
            cum = np.cumsum(onehot[order], axis=0)
            total = cum[-1]
            # candidate split after position p keeps rows 0..p on the left
            positions = np.nonzero(sv[:-1] < sv[1:])[0]
            if positions.size == 0:
                continue
            n_left = positions + 1
            n_right = n - n_left
            valid = (n_left >= self.hp.min_samples_leaf) & (n_right >= self.hp.min_samples_leaf)
            positions = positions[valid]
            if positions.size == 0:
                continue
            n_left = n_left[valid]
            n_right = n - n_left
            left_counts = cum[positions]
            right_counts = total - left_counts
            gini_left = 1.0 - np.sum((left_counts / n_left[:, None]) ** 2, axis=1)
            gini_right = 1.0 - np.sum((right_counts / n_right[:, None]) ** 2, axis=1)
            weighted = (n_left * gini_left + n_right * gini_right) / n
            at = int(np.argmin(weighted))  # first minimum: smallest threshold wins ties
            score = float(weighted[at])
            if best is None or score < best[0]:  # strict: earlier feature wins ties
                p = positions[at]
                best = (score, int(feature), float((sv[p] + sv[p + 1]) / 2.0))
        if best is None:
            return None
        return best[1], best[2]


class RandomForestModel:
    """Trained forest; immutable, JSON-serializable, schema-checked at inference."""

    def __init__(self, trees: list[dict], hyperparams: ForestHyperparams, schema: tuple[str, ...]):
        self.trees = trees
        self.hyperparams = hyperparams
        self.schema = tuple(schema)

    # --- inference -------------------------------------------------------

    def classify(self, features: FeatureVector) -> LabelDistribution:
        return self.classify_array(features.to_array())

    def classify_array(self, row: np.ndarray) -> LabelDistribution:
        if row.shape != (len(self.schema),):
            raise SchemaMismatchError(
                f"feature vector has {row.shape[0]} entries, model expects {len(self.schema)}"
            )
        votes = np.zeros(N_CLASSES, dtype=int)
        for tree in self.trees:
            votes[self._tree_vote(tree, row)] += 1
        return LabelDistribution(tuple(float(v) / len(self.trees) for v in votes))

    def predict(self, features: FeatureVector) -> MaintenanceLabel:
        return self.classify(features).argmax()

    @staticmethod
    def _tree_vote(node: dict, row: np.ndarray) -> int:
        while "votes" not in node:
            node = node["left"] if row[node["feature"]] <= node["threshold"] else node["right"]
        votes = node["votes"]
        best = max(votes)
        return votes.index(best)  # first max: ties break in label order

    # --- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": list(self.schema),
            "schema_version": SCHEMA_VERSION,
            "labels": [label.value for label in LABEL_ORDER],
            "hyperparams": {
                "n_trees": self.hyperparams.n_trees,
                "max_depth": self.hyperparams.max_depth,
                "min_samples_leaf": self.hyperparams.min_samples_leaf,
                "features_per_split": self.hyperparams.features_per_split,
                "seed": self.hyperparams.seed,
            },
            "trees": self.trees,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def from_dict(cls, doc: dict) -> "RandomForestModel":
        try:
            hp = ForestHyperparams(**doc["hyperparams"])
            schema = tuple(doc["schema"])
            labels = [MaintenanceLabel(v) for v in doc["labels"]]
            trees = doc["trees"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed model document: {exc}") from exc
        if labels != list(LABEL_ORDER):
            raise SchemaMismatchError("model label order does not match this build")
        if len(trees) != hp.n_trees:
            raise ValidationError("tree count does not match hyperparameters")
        return cls(trees=trees, hyperparams=hp, schema=schema)

    @classmethod
    def load(cls, path: str | Path) -> "RandomForestModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def train_classifier(
    data: LabeledDataset, hyperparams: ForestHyperparams = DEFAULT_HYPERPARAMS
) -> RandomForestModel:
    """Fit the forest; every label class must appear at least once."""
    x, y = data.matrix()
    if not np.all(np.isfinite(x)):
        raise TrainingError("dataset contains non-finite feature values")
    present = set(int(c) for c in np.unique(y))
    absent = [label.value for i, label in enumerate(LABEL_ORDER) if i not in present]
    if absent:
        raise TrainingError(f"dataset lacks rows for labels: {', '.join(absent)}")
    if hyperparams.n_trees < 1:
        raise ValidationError("n_trees must be >= 1")
    trees = []
    for i in range(hyperparams.n_trees):
        rng = np.random.default_rng(hyperparams.seed + i)
        trees.append(_TreeBuilder(x, y, hyperparams, rng).build())
    return RandomForestModel(trees=trees, hyperparams=hyperparams, schema=data.schema)


def classify(model: RandomForestModel, features: FeatureVector) -> LabelDistribution:
    """Per-class probability = fraction of trees voting that class."""
    if model.schema != FEATURE_NAMES:
        raise SchemaMismatchError("model was trained on a different feature schema")
    return model.classify(features)


def _node_counts(node: dict, per_feature: np.ndarray, n_root: float) -> np.ndarray:
    """Accumulate Gini decreases into per_feature; returns class counts below node."""
    if "votes" in node:
        return np.asarray(node["votes"], dtype=float)
    left = _node_counts(node["left"], per_feature, n_root)
    right = _node_counts(node["right"], per_feature, n_root)
    here = left + right
    n, nl, nr = here.sum(), left.sum(), right.sum()
    decrease = _gini(here) - (nl / n) * _gini(left) - (nr / n) * _gini(right)
    per_feature[node["feature"]] += (n / n_root) * decrease
    return here


def _tree_size(node: dict) -> float:
    if "votes" in node:
        return float(sum(node["votes"]))
    return _tree_size(node["left"]) + _tree_size(node["right"])


def feature_importance(model: RandomForestModel) -> list[tuple[str, float]]:
    """Mean decrease in Gini impurity, normalized to sum 1, descending.

    Computable from the serialized tree alone: a node's class counts are the
    sum of the leaf vote vectors below it. Features never split on score 0;
    if no tree splits at all (single-class training data) every importance is
    0 and the unnormalizable zero vector is returned as-is.
    """
    totals = np.zeros(len(model.schema))
    for tree in model.trees:
        _node_counts(tree, totals, n_root=_tree_size(tree))
    grand = totals.sum()
    if grand > 0:
        totals = totals / grand
    ranked = sorted(zip(model.schema, totals), key=lambda kv: (-kv[1], kv[0]))
    return [(name, float(v)) for name, v in ranked]
