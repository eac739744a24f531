"""Dataset ingestion: CSV, binary PGM image directories, and synthetic data.

All ingestion paths end in a LabeledDataset with unit-normalized columns and
labels renumbered 1..k. Synthetic generation stands in for face databases:
k Gaussian centroids with per-class Gaussian noise, which lands in the
undersampled regime whenever d exceeds the sample count.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import IngestError
from .scatter import LabeledDataset


def ingest_csv(path) -> LabeledDataset:
    """Read `label,f1,...,fd` rows into a dataset, one sample per row.

    Labels map to 1..k by first appearance. Errors carry row/column
    diagnostics (rows counted from 1 including the header).
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file") from None
        if not header or header[0].strip() != "label":
            raise IngestError(f"{path}: header must start with 'label'")
        d = len(header) - 1
        if d < 1:
            raise IngestError(f"{path}: header has no feature columns")
        labels_raw = []
        columns = []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != d + 1:
                raise IngestError(
                    f"{path}: row {rownum} has {len(row)} fields, expected {d + 1}")
            labels_raw.append(row[0].strip())
            features = np.empty(d)
            for j, cell in enumerate(row[1:], start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise IngestError(
                        f"{path}: row {rownum}, column {header[j]}: "
                        f"not numeric: {cell!r}") from None
                if not math.isfinite(value):
                    raise IngestError(
                        f"{path}: row {rownum}, column {header[j]}: "
                        f"non-finite value {cell!r}")
                features[j - 1] = value
            columns.append(features)
    if not columns:
        raise IngestError(f"{path}: no data rows")
    label_map = {}
    labels = []
    for raw in labels_raw:
        if raw not in label_map:
            label_map[raw] = len(label_map) + 1
        labels.append(label_map[raw])
    data = np.column_stack(columns)
    norms = np.linalg.norm(data, axis=0)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise IngestError(f"{path}: row {int(zero[0]) + 2}: zero-norm sample")
    return LabeledDataset(data / norms, np.array(labels), normalized=True)


def export_csv(ds: LabeledDataset, path) -> None:
    """Write a dataset in the ingest_csv format; round-trips exactly."""
    path = Path(path)
    d = ds.dim
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label"] + [f"f{i}" for i in range(1, d + 1)])
            for j in range(ds.n_samples):
                writer.writerow([int(ds.labels[j])]
                                + [f"{x:.17g}" for x in ds.data[:, j]])
    except OSError as exc:
        raise IngestError(f"cannot write {path}: {exc}") from exc


def _next_token(buf: bytes, pos: int, path) -> tuple[bytes, int]:
    n = len(buf)
    while pos < n:
        c = buf[pos:pos + 1]
        if c == b"#":
            while pos < n and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            break
    if pos >= n:
        raise IngestError(f"{path}: truncated PGM header")
    start = pos
    while pos < n and not buf[pos:pos + 1].isspace():
        pos += 1
    return buf[start:pos], pos


def read_pgm(path) -> np.ndarray:
    """Binary 8-bit grayscale PGM (P5) as a (rows, cols) array in [0, 1]."""
    path = Path(path)
    try:
        buf = path.read_bytes()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    magic, pos = _next_token(buf, 0, path)
    if magic != b"P5":
        raise IngestError(f"{path}: not a binary PGM (magic {magic!r}, expected P5)")
    fields = []
    for name in ("width", "height", "maxval"):
        token, pos = _next_token(buf, pos, path)
        try:
            fields.append(int(token))
        except ValueError:
            raise IngestError(f"{path}: bad {name} field {token!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise IngestError(f"{path}: bad image size {width}x{height}")
    if not 1 <= maxval <= 255:
        raise IngestError(f"{path}: maxval {maxval} outside 8-bit range")
    pos += 1  # single whitespace byte separates header and raster
    raster = buf[pos:pos + width * height]
    if len(raster) != width * height:
        raise IngestError(f"{path}: raster truncated "
                          f"({len(raster)} of {width * height} bytes)")
    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    return pixels.astype(float) / maxval


def ingest_image_dir(path) -> LabeledDataset:
    """Read `<root>/<class>/*.pgm` into a dataset, one class per subdirectory.

    Images must share one size; each is flattened column-major, scaled to
    [0, 1], then unit-normalized. Classes are numbered by sorted directory
    name, files sorted within each class.
    """
    root = Path(path)
    if not root.is_dir():
        raise IngestError(f"{root}: not a directory")
    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise IngestError(f"{root}: no class subdirectories")
    columns = []
    labels = []
    names = []
    shape = None
    for class_index, class_dir in enumerate(class_dirs, start=1):
        files = sorted(class_dir.glob("*.pgm"))
        if not files:
            raise IngestError(f"{class_dir}: no .pgm files")
        for file in files:
            image = read_pgm(file)
            if shape is None:
                shape = image.shape
            elif image.shape != shape:
                raise IngestError(
                    f"{file}: size {image.shape[1]}x{image.shape[0]} differs "
                    f"from expected {shape[1]}x{shape[0]}")
            columns.append(image.flatten(order="F"))
            labels.append(class_index)
            names.append(str(file))
    data = np.column_stack(columns)
    norms = np.linalg.norm(data, axis=0)
    zero = np.nonzero(norms == 0.0)[0]
    if zero.size:
        raise IngestError(f"{names[int(zero[0])]}: all-black image has zero norm")
    return LabeledDataset(data / norms, np.array(labels), normalized=True)


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of a synthetic class-cluster dataset.

    ``noise_scale`` may be zero (all samples collapse onto their centroid,
    making the within-class scatter exactly zero); ``centroid_scale`` must be
    positive. d >= k * per_class puts the dataset in the undersampled regime.
    """

    d: int
    k: int
    per_class: int
    noise_scale: float = 0.3
    centroid_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.k < 2:
            raise ValueError("k must be >= 2")
        if self.per_class < 1:
            raise ValueError("per_class must be >= 1")
        if self.noise_scale < 0.0:
            raise ValueError("noise_scale must be >= 0")
        if self.centroid_scale <= 0.0:
            raise ValueError("centroid_scale must be > 0")

    @property
    def n(self) -> int:
        return self.k * self.per_class


def make_synthetic(spec: SyntheticSpec) -> LabeledDataset:
    """Deterministic synthetic dataset: Gaussian centroids plus class noise."""
    rng = np.random.default_rng(spec.seed)
    centroids = spec.centroid_scale * rng.standard_normal((spec.d, spec.k))
    columns = np.empty((spec.d, spec.n))
    labels = np.empty(spec.n, dtype=int)
    pos = 0
    for j in range(spec.k):
        block = centroids[:, j][:, None]
        if spec.noise_scale > 0.0:
            block = block + spec.noise_scale * rng.standard_normal(
                (spec.d, spec.per_class))
        else:
            block = np.repeat(block, spec.per_class, axis=1)
        columns[:, pos:pos + spec.per_class] = block
        labels[pos:pos + spec.per_class] = j + 1
        pos += spec.per_class
    return LabeledDataset.from_columns(columns, labels, normalize=True)


def standard_benchmark() -> SyntheticSpec:
    """The repository's reference synthetic benchmark (undersampled regime)."""
    return SyntheticSpec(d=200, k=8, per_class=10, noise_scale=0.35,
                         centroid_scale=1.0, seed=11235)
