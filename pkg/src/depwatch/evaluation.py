"""Classification metrics: confusion matrices, per-class precision/recall, F1."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .features import LABEL_ORDER, MaintenanceLabel


def confusion_matrix(
    truth: list[MaintenanceLabel], predicted: list[MaintenanceLabel]
) -> np.ndarray:
    """4x4 counts, rows = truth, columns = prediction, both in LABEL_ORDER."""
    if len(truth) != len(predicted):
        raise ValidationError("truth and prediction lists differ in length")
    matrix = np.zeros((len(LABEL_ORDER), len(LABEL_ORDER)), dtype=int)
    for t, p in zip(truth, predicted):
        matrix[LABEL_ORDER.index(t), LABEL_ORDER.index(p)] += 1
    return matrix


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


def per_class_metrics(matrix: np.ndarray) -> dict[MaintenanceLabel, ClassMetrics]:
    out = {}
    for i, label in enumerate(LABEL_ORDER):
        tp = float(matrix[i, i])
        predicted = float(matrix[:, i].sum())
        actual = float(matrix[i, :].sum())
        precision = tp / predicted if predicted else 1.0
        recall = tp / actual if actual else 1.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        out[label] = ClassMetrics(precision=precision, recall=recall, f1=f1, support=int(actual))
    return out


def macro_f1(matrix: np.ndarray) -> float:
    metrics = per_class_metrics(matrix)
    return float(np.mean([m.f1 for m in metrics.values()]))


def accuracy(matrix: np.ndarray) -> float:
    total = matrix.sum()
    return float(np.trace(matrix) / total) if total else 0.0


def binary_confusion(
    truth: list[MaintenanceLabel], predicted: list[MaintenanceLabel]
) -> dict[str, int]:
    """Collapse to maintained (Active or FeatureComplete) vs not.

    The bridge to binary prior art: positives are the *unmaintained* states.
    """
    maintained = {MaintenanceLabel.ACTIVE, MaintenanceLabel.FEATURE_COMPLETE}
    counts = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    for t, p in zip(truth, predicted):
        t_pos = t not in maintained
        p_pos = p not in maintained
        if t_pos and p_pos:
            counts["tp"] += 1
        elif not t_pos and p_pos:
            counts["fp"] += 1
        elif t_pos and not p_pos:
            counts["fn"] += 1
        else:
            counts["tn"] += 1
    return counts


def train_test_split(n: int, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic shuffled index split; returns (train_idx, test_idx)."""
    if not (0.0 < test_fraction < 1.0):
        raise ValidationError("test_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_test = max(1, int(round(n * test_fraction)))
    return order[n_test:], order[:n_test]
