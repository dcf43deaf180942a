"""Dataset ingestion, seeded synthesis, splitting, and batching.

Datasets are immutable after load: a float64 feature matrix plus either real
targets (regression) or integer class indices (classification).  All
randomness (splits, batch order, synthetic draws) flows from explicit seeds,
so every downstream artifact is a pure function of its configuration.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import (
    ContractViolation,
    CsvParseError,
    IdxFormatError,
    SchemaError,
    SplitSizeError,
)
from .objective import Batch

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus targets; ``class_count`` is None for regression."""

    features: np.ndarray
    targets: np.ndarray
    name: str = "dataset"
    class_count: int | None = None
    feature_names: tuple[str, ...] | None = None
    norm_mean: np.ndarray | None = None
    norm_std: np.ndarray | None = None

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise SchemaError(f"features must be 2-D, got shape {features.shape}")
        if not np.isfinite(features).all():
            raise SchemaError(f"dataset {self.name!r} contains non-finite feature values")
        if self.class_count is None:
            targets = np.asarray(self.targets, dtype=np.float64)
            if not np.isfinite(targets).all():
                raise SchemaError(f"dataset {self.name!r} contains non-finite targets")
        else:
            targets = np.asarray(self.targets, dtype=np.int64)
            if targets.size and (targets.min() < 0 or targets.max() >= self.class_count):
                raise SchemaError(
                    f"class indices must lie in [0, {self.class_count}), "
                    f"got range [{targets.min()}, {targets.max()}]"
                )
        if targets.ndim != 1 or targets.shape[0] != features.shape[0]:
            raise SchemaError(
                f"targets length {targets.shape} does not match {features.shape[0]} rows"
            )
        features = features.copy() if features.flags.writeable else features
        targets = targets.copy() if targets.flags.writeable else targets
        features.setflags(write=False)
        targets.setflags(write=False)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)

    @property
    def size(self) -> int:
        return self.features.shape[0]

    @property
    def input_dim(self) -> int:
        return self.features.shape[1]

    def to_batch(self) -> Batch:
        return Batch(self.features, self.targets)

    def take(self, indices: np.ndarray, suffix: str) -> "Dataset":
        return replace(
            self,
            features=self.features[indices],
            targets=self.targets[indices],
            name=f"{self.name}/{suffix}",
        )


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint train/test/val sizes drawn by a seeded permutation."""

    train_count: int
    test_count: int = 0
    val_count: int = 0
    shuffle_seed: int = 0

    def __post_init__(self):
        for label, count in (
            ("train_count", self.train_count),
            ("test_count", self.test_count),
            ("val_count", self.val_count),
        ):
            if count < 0:
                raise ContractViolation(f"{label} must be non-negative, got {count}")
        if self.shuffle_seed < 0:
            raise ContractViolation(f"shuffle_seed must be non-negative, got {self.shuffle_seed}")


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Deterministic permutation-partition into (train, test, val)."""
    total = spec.train_count + spec.test_count + spec.val_count
    if total > dataset.size:
        raise SplitSizeError(
            f"split sizes {spec.train_count}+{spec.test_count}+{spec.val_count} "
            f"exceed dataset size {dataset.size}"
        )
    order = np.random.default_rng(spec.shuffle_seed).permutation(dataset.size)
    a = spec.train_count
    b = a + spec.test_count
    c = b + spec.val_count
    return (
        dataset.take(order[:a], "train"),
        dataset.take(order[a:b], "test"),
        dataset.take(order[b:c], "val"),
    )


def standardize(train: Dataset, *others: Dataset) -> tuple[Dataset, ...]:
    """Z-score all splits by per-column statistics of the training split.

    Constant columns keep their (zero) deviation rather than dividing by
    zero.  Targets are left untouched.
    """
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)

    def apply(ds: Dataset) -> Dataset:
        return replace(
            ds,
            features=(ds.features - mean) / std,
            norm_mean=mean.copy(),
            norm_std=std.copy(),
        )

    return tuple(apply(ds) for ds in (train, *others))


class BatchIterator:
    """Seeded minibatch order over one split.

    Every epoch visits each example exactly once; the order is a pure
    function of (shuffle_seed, stream, epoch).  The final batch of an epoch
    may be smaller than ``batch_size``.
    """

    def __init__(self, dataset: Dataset, batch_size: int, shuffle_seed: int, stream: int = 0):
        if batch_size < 1:
            raise ContractViolation(f"batch_size must be >= 1, got {batch_size}")
        if shuffle_seed < 0 or stream < 0:
            raise ContractViolation("shuffle_seed and stream must be non-negative")
        if dataset.size < 1:
            raise ContractViolation("cannot iterate an empty dataset")
        self.dataset = dataset
        self.batch_size = batch_size
        self.shuffle_seed = shuffle_seed
        self.stream = stream

    @property
    def batches_per_epoch(self) -> int:
        return math.ceil(self.dataset.size / self.batch_size)

    def epoch(self, epoch_index: int) -> Iterator[Batch]:
        rng = np.random.default_rng([self.shuffle_seed, self.stream, epoch_index])
        order = rng.permutation(self.dataset.size)
        for start in range(0, self.dataset.size, self.batch_size):
            idx = order[start : start + self.batch_size]
            yield Batch(self.dataset.features[idx], self.dataset.targets[idx])


def _column_label(names: list[str] | None, index: int) -> str:
    return names[index] if names is not None else str(index)


def load_csv(
    path: str | Path,
    target_column: str | int,
    has_header: bool = True,
    name: str | None = None,
) -> Dataset:
    """Load a numeric CSV; every non-target column becomes a feature.

    The target may be named (requires a header) or given as a 0-based column
    index.  Any cell that does not parse as a finite decimal raises
    :class:`CsvParseError` with its file line and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path} is empty")
    header: list[str] | None = None
    first_data_line = 1
    if has_header:
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        first_data_line = 2
    if isinstance(target_column, str):
        if header is None:
            raise SchemaError("a named target column requires has_header=True")
        if target_column not in header:
            raise SchemaError(f"target column {target_column!r} not found in header {header}")
        target_idx = header.index(target_column)
    else:
        target_idx = int(target_column)
    width = len(rows[0]) if rows else (len(header) if header else 0)
    if header is not None:
        width = len(header)
    if not 0 <= target_idx < width:
        raise SchemaError(f"target column index {target_idx} out of range for {width} columns")

    features = np.empty((len(rows), width - 1))
    targets = np.empty(len(rows))
    for r, row in enumerate(rows):
        line_no = first_data_line + r
        if len(row) != width:
            raise SchemaError(f"row at line {line_no} has {len(row)} cells, expected {width}")
        k = 0
        for c, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise CsvParseError(line_no, _column_label(header, c), cell) from None
            if not math.isfinite(value):
                raise CsvParseError(line_no, _column_label(header, c), cell)
            if c == target_idx:
                targets[r] = value
            else:
                features[r, k] = value
                k += 1
    feature_names = None
    if header is not None:
        feature_names = tuple(n for i, n in enumerate(header) if i != target_idx)
    return Dataset(
        features,
        targets,
        name=name or path.stem,
        feature_names=feature_names,
    )


def write_csv(dataset: Dataset, path: str | Path, target_name: str = "target") -> Path:
    """Write a regression dataset so :func:`load_csv` round-trips it bitwise.

    Values are rendered with ``repr`` (shortest round-trip form).
    """
    path = Path(path)
    names = dataset.feature_names or tuple(
        f"x{i + 1}" for i in range(dataset.input_dim)
    )
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([*names, target_name])
        for row, target in zip(dataset.features, dataset.targets):
            cells = [repr(float(v)) for v in row]
            if dataset.class_count is None:
                cells.append(repr(float(target)))
            else:
                cells.append(str(int(target)))
            writer.writerow(cells)
    return path


def _read_be32(fh, path: Path, what: str) -> int:
    raw = fh.read(4)
    if len(raw) != 4:
        raise IdxFormatError(f"{path}: truncated while reading {what}")
    return struct.unpack(">I", raw)[0]


def load_idx(images_path: str | Path, labels_path: str | Path, name: str = "idx") -> Dataset:
    """Load an IDX image/label pair into rows of [0, 1] pixels.

    Image files must carry big-endian magic 0x00000803 (unsigned bytes, 3
    dimensions) and label files 0x00000801; the two counts must agree.
    """
    images_path = Path(images_path)
    labels_path = Path(labels_path)
    with images_path.open("rb") as fh:
        magic = _read_be32(fh, images_path, "magic")
        if magic != IDX_IMAGES_MAGIC:
            raise IdxFormatError(
                f"{images_path}: expected image magic 0x{IDX_IMAGES_MAGIC:08x}, "
                f"got 0x{magic:08x}"
            )
        count = _read_be32(fh, images_path, "count")
        rows = _read_be32(fh, images_path, "rows")
        cols = _read_be32(fh, images_path, "cols")
        pixel_bytes = fh.read(count * rows * cols)
        if len(pixel_bytes) != count * rows * cols:
            raise IdxFormatError(
                f"{images_path}: expected {count * rows * cols} pixel bytes, "
                f"got {len(pixel_bytes)}"
            )
    with labels_path.open("rb") as fh:
        magic = _read_be32(fh, labels_path, "magic")
        if magic != IDX_LABELS_MAGIC:
            raise IdxFormatError(
                f"{labels_path}: expected label magic 0x{IDX_LABELS_MAGIC:08x}, "
                f"got 0x{magic:08x}"
            )
        label_count = _read_be32(fh, labels_path, "count")
        label_bytes = fh.read(label_count)
        if len(label_bytes) != label_count:
            raise IdxFormatError(
                f"{labels_path}: expected {label_count} label bytes, got {len(label_bytes)}"
            )
    if label_count != count:
        raise SchemaError(
            f"image count {count} ({images_path}) != label count {label_count} ({labels_path})"
        )
    pixels = np.frombuffer(pixel_bytes, dtype=np.uint8).reshape(count, rows * cols)
    features = pixels.astype(np.float64) / 255.0
    targets = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    class_count = int(targets.max()) + 1 if count else 0
    return Dataset(features, targets, name=name, class_count=class_count)


def synthesize_regression(
    n: int, d: int, noise_std: float, seed: int
) -> tuple[Dataset, np.ndarray]:
    """Standard-normal features with targets X @ w0 + noise; returns w0 too."""
    if n <= 0 or d <= 0:
        raise ContractViolation(f"n and d must be positive, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d))
    w0 = rng.standard_normal(d)
    noise = rng.standard_normal(n)
    targets = features @ w0 + noise_std * noise
    return Dataset(features, targets, name=f"synth_reg_{n}x{d}"), w0


def synthesize_classification(
    n: int, d: int, classes: int, separation: float, seed: int
) -> Dataset:
    """Unit-variance Gaussian blobs with class means ``separation`` apart.

    Means sit on a circle of radius ``separation`` in the first two feature
    dimensions (on a line for d == 1), so the geometry does not depend on
    seed luck.
    """
    if n <= 0 or d <= 0 or classes < 2:
        raise ContractViolation(
            f"need n > 0, d > 0, classes >= 2; got n={n}, d={d}, classes={classes}"
        )
    centers = np.zeros((classes, d))
    if d == 1:
        centers[:, 0] = (np.arange(classes) - (classes - 1) / 2.0) * separation
    else:
        angles = 2.0 * np.pi * np.arange(classes) / classes
        centers[:, 0] = separation * np.cos(angles)
        centers[:, 1] = separation * np.sin(angles)
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, classes, n)
    features = centers[labels] + rng.standard_normal((n, d))
    return Dataset(
        features,
        labels,
        name=f"synth_cls_{n}x{d}x{classes}",
        class_count=classes,
    )
