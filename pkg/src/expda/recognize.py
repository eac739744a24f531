"""Nearest-neighbor recognition protocol: splits, classification, accuracy.

Replicates the standard benchmark loop: a seeded random subset of ell
samples per class forms the training set, the rest are queries; fit a
projection on the training set, classify each query by the nearest training
sample in the projected Euclidean metric (K = 1), and average accuracy over
repeated splits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .densela import DEFAULT_ORACLE_CAP
from .eda import ProjectionBasis, fit_method
from .exceptions import DatasetError
from .scatter import LabeledDataset


@dataclass(frozen=True)
class SplitSpec:
    """Per-class training count, base seed, and number of repeats."""

    per_class_train: int
    seed: int = 0
    repeats: int = 10

    def __post_init__(self):
        if self.per_class_train < 1:
            raise ValueError("per_class_train must be >= 1")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")


@dataclass(frozen=True)
class EvaluationReport:
    """Mean recognition accuracy and timing for one (method, tol) cell."""

    method: str
    t: int
    tol: float | None
    train_per_class: int
    accuracy: float
    accuracy_std: float
    fit_seconds: float
    classify_seconds: float
    per_repeat_accuracy: list = field(default_factory=list)


def split(ds: LabeledDataset, spec: SplitSpec, repeat_index: int):
    """Seeded per-class split into (train, test); deterministic per repeat.

    Every class contributes exactly ``per_class_train`` training samples; the
    remaining samples form the test set, which must be nonempty per class.
    """
    ell = spec.per_class_train
    smallest = int(ds.class_counts.min())
    if ell >= smallest:
        j = int(np.argmin(ds.class_counts)) + 1
        raise DatasetError(
            f"per_class_train={ell} leaves no test samples for class {j} "
            f"(it has {smallest})")
    rng = np.random.default_rng([spec.seed, repeat_index])
    train_idx = []
    test_idx = []
    for j in range(1, ds.n_classes + 1):
        idx = np.nonzero(ds.labels == j)[0]
        shuffled = idx[rng.permutation(idx.size)]
        train_idx.append(shuffled[:ell])
        test_idx.append(shuffled[ell:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))
    train = LabeledDataset(ds.data[:, train_idx], ds.labels[train_idx],
                           normalized=ds.normalized)
    test = LabeledDataset(ds.data[:, test_idx], ds.labels[test_idx],
                          normalized=ds.normalized)
    return train, test


def _nn_label(projected_train: np.ndarray, labels: np.ndarray,
              projected_query: np.ndarray) -> int:
    distances = np.linalg.norm(projected_train - projected_query[:, None], axis=0)
    return int(labels[int(np.argmin(distances))])


def nn_classify(v, train: LabeledDataset, query) -> int:
    """Label of the training sample nearest to the query in the projection.

    Ties are broken by the lowest training index.
    """
    basis = v.v if isinstance(v, ProjectionBasis) else np.asarray(v, dtype=float)
    if train.n_samples < 1:
        raise DatasetError("training set is empty")
    query = np.asarray(query, dtype=float)
    return _nn_label(basis.T @ train.data, train.labels, basis.T @ query)


def classify_all(v, train: LabeledDataset, queries: np.ndarray) -> np.ndarray:
    """Vector of nn_classify labels for each query column."""
    basis = v.v if isinstance(v, ProjectionBasis) else np.asarray(v, dtype=float)
    projected_train = basis.T @ train.data
    projected_queries = basis.T @ queries
    return np.array([
        _nn_label(projected_train, train.labels, projected_queries[:, j])
        for j in range(queries.shape[1])
    ])


def evaluate(ds: LabeledDataset, method: str, t: int, tol: float,
             spec: SplitSpec, oracle_cap: int = DEFAULT_ORACLE_CAP,
             backend: str = "auto") -> EvaluationReport:
    """Run split -> fit -> classify over all repeats for one method.

    Reported times are per-repeat means of wall time around the fit and the
    classification separately. The fit seed is derived from (spec.seed,
    repeat index), so all methods see identical splits and the whole
    evaluation is deterministic.
    """
    accuracies = []
    fit_times = []
    classify_times = []
    for r in range(spec.repeats):
        train, test = split(ds, spec, r)
        start = time.perf_counter()
        basis = fit_method(method, train, t, tol=tol, seed=[spec.seed, r, 1],
                           oracle_cap=oracle_cap, backend=backend)
        fit_times.append(time.perf_counter() - start)
        start = time.perf_counter()
        predicted = classify_all(basis, train, test.data)
        classify_times.append(time.perf_counter() - start)
        accuracies.append(float(np.mean(predicted == test.labels)))
    return EvaluationReport(
        method=method,
        t=t,
        tol=tol,
        train_per_class=spec.per_class_train,
        accuracy=float(np.mean(accuracies)),
        accuracy_std=float(np.std(accuracies)),
        fit_seconds=float(np.mean(fit_times)),
        classify_seconds=float(np.mean(classify_times)),
        per_repeat_accuracy=accuracies,
    )
