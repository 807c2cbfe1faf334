"""Classification metrics: confusion matrix, per-class PRF, weighted F1."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError

__all__ = [
    "confusion_matrix",
    "per_class_prf",
    "weighted_f1",
    "MetricsRecord",
    "evaluate_predictions",
]


def _check_indices(values: np.ndarray, n_classes: int, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.int64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
        raise IndexError(f"{name} contains a value outside [0, {n_classes})")
    return arr


def confusion_matrix(labels, predictions, n_classes: int) -> np.ndarray:
    """Counts indexed as [true class, predicted class]."""
    y = _check_indices(labels, n_classes, "labels")
    p = _check_indices(predictions, n_classes, "predictions")
    if y.shape != p.shape:
        raise DimensionError("labels and predictions must have equal length")
    if y.size == 0:
        raise DataError("cannot evaluate zero samples")
    conf = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(conf, (y, p), 1)
    return conf


def per_class_prf(conf: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-class precision, recall and F1 with a 0-when-undefined convention."""
    tp = np.diag(conf).astype(np.float64)
    pred_pos = conf.sum(axis=0).astype(np.float64)
    true_pos = conf.sum(axis=1).astype(np.float64)
    precision = np.divide(tp, pred_pos, out=np.zeros_like(tp), where=pred_pos > 0)
    recall = np.divide(tp, true_pos, out=np.zeros_like(tp), where=true_pos > 0)
    pr = precision + recall
    f1 = np.divide(2 * precision * recall, pr, out=np.zeros_like(tp), where=pr > 0)
    return precision, recall, f1


def weighted_f1(predictions, labels, n_classes: int) -> float:
    """Support-weighted mean of per-class F1 scores."""
    conf = confusion_matrix(labels, predictions, n_classes)
    _, _, f1 = per_class_prf(conf)
    support = conf.sum(axis=1).astype(np.float64)
    return float((support / support.sum() * f1).sum())


@dataclass
class MetricsRecord:
    """Evaluation result for one (run, seed, modality, split)."""

    run_id: str
    seed: int
    variant: str
    modality: str
    split: str
    weighted_f1: float
    accuracy: float
    per_class_precision: list[float]
    per_class_recall: list[float]
    per_class_f1: list[float]
    confusion: list[list[int]]
    n_samples: int
    baseline_f1: float | None = None
    extras: dict = field(default_factory=dict)

    def csv_row(self) -> dict:
        return {
            "run_id": self.run_id,
            "seed": self.seed,
            "variant": self.variant,
            "modality": self.modality,
            "split": self.split,
            "weighted_f1": self.weighted_f1,
            "accuracy": self.accuracy,
        }


def evaluate_predictions(
    predictions,
    labels,
    n_classes: int,
    *,
    run_id: str = "",
    seed: int = 0,
    variant: str = "full",
    modality: str = "m1",
    split: str = "test",
) -> MetricsRecord:
    """Build a full MetricsRecord from prediction/label vectors."""
    conf = confusion_matrix(labels, predictions, n_classes)
    precision, recall, f1 = per_class_prf(conf)
    support = conf.sum(axis=1).astype(np.float64)
    wf1 = float((support / support.sum() * f1).sum())
    accuracy = float(np.trace(conf) / conf.sum())
    return MetricsRecord(
        run_id=run_id,
        seed=seed,
        variant=variant,
        modality=modality,
        split=split,
        weighted_f1=wf1,
        accuracy=accuracy,
        per_class_precision=[float(v) for v in precision],
        per_class_recall=[float(v) for v in recall],
        per_class_f1=[float(v) for v in f1],
        confusion=conf.tolist(),
        n_samples=int(conf.sum()),
    )
