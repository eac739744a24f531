"""Labeled datasets and the within/between-class scatter factor matrices.

The scatter matrices are never formed at full dimension on the fast path;
everything downstream works with the factor matrices ``h_w`` (d x n) and
``h_b`` (d x k), whose outer products reconstruct them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .densela import DEFAULT_ORACLE_CAP, check_oracle_scale
from .exceptions import DatasetError

#: Column 2-norms may deviate from one by at most this much after scaling.
NORMALIZATION_TOL = 1e-12


@dataclass(frozen=True)
class LabeledDataset:
    """Column-sample data matrix with integer class labels.

    Parameters
    ----------
    data : ndarray, d x n
        One sample per column.
    labels : ndarray of int, length n
        Class indices in 1..k; every class must appear at least once.
    normalized : bool
        Whether columns were scaled to unit 2-norm at ingestion.
    """

    data: np.ndarray
    labels: np.ndarray
    normalized: bool = False
    class_counts: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        labels = np.asarray(self.labels, dtype=int)
        if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
            raise DatasetError(f"data must be a d x n matrix, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DatasetError("data has non-finite entries")
        if labels.shape != (data.shape[1],):
            raise DatasetError(
                f"labels must have one entry per sample: {labels.shape} "
                f"vs n={data.shape[1]}"
            )
        k = int(labels.max(initial=0))
        if labels.min(initial=1) < 1 or k < 1:
            raise DatasetError("labels must be integers in 1..k")
        counts = np.bincount(labels, minlength=k + 1)[1:]
        if np.any(counts == 0):
            missing = int(np.nonzero(counts == 0)[0][0]) + 1
            raise DatasetError(f"class {missing} has no samples")
        if self.normalized:
            norms = np.linalg.norm(data, axis=0)
            if np.abs(norms - 1.0).max() > NORMALIZATION_TOL:
                raise DatasetError("normalized dataset has non-unit columns")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_counts", counts)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_counts)

    @classmethod
    def from_columns(cls, data, labels, normalize: bool = True,
                     column_names=None) -> "LabeledDataset":
        """Build a dataset, scaling each column to unit 2-norm.

        ``column_names`` is used only to name offending columns in errors.
        """
        data = np.array(data, dtype=float)
        if normalize:
            if data.ndim != 2:
                raise DatasetError("data must be a d x n matrix")
            norms = np.linalg.norm(data, axis=0)
            bad = np.nonzero(norms == 0.0)[0]
            if bad.size:
                j = int(bad[0])
                name = column_names[j] if column_names is not None else f"column {j}"
                raise DatasetError(f"cannot normalize zero-norm sample: {name}")
            data = data / norms
        return cls(data, labels, normalized=normalize)


@dataclass(frozen=True)
class ScatterPair:
    """Scatter factor matrices and centroids for one dataset.

    ``h_w`` columns are the class-centered samples grouped by class;
    ``h_b`` column j is sqrt(n_j) (mu_j - mu). The dense scatter matrices
    are h_w h_w^T and h_b h_b^T by construction.
    """

    h_w: np.ndarray            # d x n
    h_b: np.ndarray            # d x k
    centroids: np.ndarray      # d x k
    global_centroid: np.ndarray  # d
    class_counts: np.ndarray   # k

    @property
    def dim(self) -> int:
        return self.h_w.shape[0]


def build_scatter(ds: LabeledDataset) -> ScatterPair:
    """Per-class centroids and the factor matrices h_w, h_b.

    Classes are processed in index order (which ingestion assigns by first
    appearance); within a class the sample order is preserved.
    """
    if ds.n_classes < 2:
        raise DatasetError(f"need at least 2 classes, got {ds.n_classes}")
    d, n = ds.data.shape
    k = ds.n_classes
    centroids = np.empty((d, k))
    h_w = np.empty((d, n))
    pos = 0
    for j in range(1, k + 1):
        block = ds.data[:, ds.labels == j]
        mu_j = block.mean(axis=1)
        centroids[:, j - 1] = mu_j
        h_w[:, pos:pos + block.shape[1]] = block - mu_j[:, None]
        pos += block.shape[1]
    mu = ds.data.mean(axis=1)
    h_b = (centroids - mu[:, None]) * np.sqrt(ds.class_counts)
    return ScatterPair(h_w, h_b, centroids, mu, ds.class_counts.copy())


def dense_scatter(sp: ScatterPair, oracle_cap: int = DEFAULT_ORACLE_CAP):
    """Materialize the dense scatter matrices (s_w, s_b) at oracle scale."""
    check_oracle_scale(sp.dim, oracle_cap, "dense_scatter")
    s_w = sp.h_w @ sp.h_w.T
    s_b = sp.h_b @ sp.h_b.T
    return 0.5 * (s_w + s_w.T), 0.5 * (s_b + s_b.T)
