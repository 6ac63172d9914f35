"""Labeled datasets: container, CSV serialization, synthetic generation."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import DatasetParseError


@dataclass
class LabeledDataset:
    """Dense feature matrix with integer class labels in ``[0, n_classes)``.

    ``label_names[c]`` records the original label value mapped to class ``c``
    (classes are assigned by sorted distinct label order on CSV load).
    """

    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    feature_names: list[str] = field(default_factory=list)
    sample_ids: list[str] = field(default_factory=list)
    label_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n, m = self.features.shape
        if self.labels.shape != (n,):
            raise ValueError(f"labels length {self.labels.shape} != n_samples {n}")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain NaN or Inf")
        if self.n_classes < 1:
            raise ValueError("n_classes must be >= 1")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
            raise ValueError("labels must lie in [0, n_classes)")
        counts = np.bincount(self.labels, minlength=self.n_classes)
        if (counts == 0).any():
            missing = np.flatnonzero(counts == 0).tolist()
            raise ValueError(f"classes with no samples: {missing}")
        if not self.feature_names:
            self.feature_names = [f"f{j}" for j in range(m)]
        if not self.sample_ids:
            self.sample_ids = [f"s{i}" for i in range(n)]
        if not self.label_names:
            self.label_names = [str(c) for c in range(self.n_classes)]
        if len(self.feature_names) != m:
            raise ValueError("feature_names length != n_features")
        if len(self.sample_ids) != n:
            raise ValueError("sample_ids length != n_samples")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "LabeledDataset":
        """New dataset restricted to ``indices`` (order preserved)."""
        indices = np.asarray(indices, dtype=np.int64)
        return LabeledDataset(
            features=self.features[indices],
            labels=self.labels[indices],
            n_classes=self.n_classes,
            feature_names=list(self.feature_names),
            sample_ids=[self.sample_ids[i] for i in indices],
            label_names=list(self.label_names),
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)


def load_dataset_csv(path) -> LabeledDataset:
    """Load a dataset from CSV with header ``sample_id,label,<feature...>``.

    Labels are mapped to ``0..K-1`` by sorted distinct value order; the
    mapping is recorded in ``label_names``.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetParseError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "sample_id" or header[1] != "label":
            raise DatasetParseError(
                f"{path}: header must start with 'sample_id,label' followed by "
                f"at least one feature column, got {header[:3]}"
            )
        feature_names = header[2:]
        sample_ids: list[str] = []
        raw_labels: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetParseError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(header)}"
                )
            sample_ids.append(row[0])
            raw_labels.append(row[1])
            values = []
            for col, cell in enumerate(row[2:], start=3):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetParseError(
                        f"{path}: row {lineno} column {col} "
                        f"({feature_names[col - 3]!r}): non-numeric value {cell!r}"
                    ) from None
                if not np.isfinite(v):
                    raise DatasetParseError(
                        f"{path}: row {lineno} column {col} "
                        f"({feature_names[col - 3]!r}): non-finite value {cell!r}"
                    )
                values.append(v)
            rows.append(values)
    if not rows:
        raise DatasetParseError(f"{path}: no data rows")
    label_names = sorted(set(raw_labels))
    label_to_index = {name: i for i, name in enumerate(label_names)}
    labels = np.array([label_to_index[v] for v in raw_labels], dtype=np.int64)
    return LabeledDataset(
        features=np.array(rows, dtype=np.float64),
        labels=labels,
        n_classes=len(label_names),
        feature_names=feature_names,
        sample_ids=sample_ids,
        label_names=label_names,
    )


def save_dataset_csv(data: LabeledDataset, path) -> None:
    """Write a dataset in the format read by :func:`load_dataset_csv`."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "label"] + list(data.feature_names))
        for i in range(data.n_samples):
            row = [data.sample_ids[i], data.label_names[data.labels[i]]]
            row += [repr(v) for v in data.features[i]]
            writer.writerow(row)


def _covariance_factor(cov: np.ndarray, m: int) -> np.ndarray:
    """Validate PSD and return a factor F with F @ F.T == cov."""
    cov = np.asarray(cov, dtype=np.float64)
    if cov.shape != (m, m):
        raise ValueError(f"covariance must be {m}x{m}, got {cov.shape}")
    if not np.allclose(cov, cov.T, atol=1e-10):
        raise ValueError("covariance must be symmetric")
    eigvals, eigvecs = np.linalg.eigh(cov)
    scale = max(abs(eigvals[0]), abs(eigvals[-1]), 1.0)
    if eigvals.min() < -1e-9 * scale:
        raise ValueError(f"covariance is not PSD (min eigenvalue {eigvals.min():g})")
    return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))


def generate_synthetic(
    class_means,
    n_per_class,
    cov=None,
    seed: int = 0,
    feature_names: list[str] | None = None,
) -> LabeledDataset:
    """Gaussian class-conditional samples.

    Parameters
    ----------
    class_means : (K, M) array; row k is the mean of class k.
    n_per_class : int or length-K sequence of per-class sample counts.
    cov : shared (M, M) covariance, or (K, M, M) per-class; identity if None.
    seed : RNG seed; output is deterministic given all arguments.
    """
    means = np.atleast_2d(np.asarray(class_means, dtype=np.float64))
    k, m = means.shape
    if np.isscalar(n_per_class):
        counts = [int(n_per_class)] * k
    else:
        counts = [int(c) for c in n_per_class]
        if len(counts) != k:
            raise ValueError("n_per_class length must equal number of classes")
    if any(c < 1 for c in counts):
        raise ValueError("each class needs at least one sample")
    if cov is None:
        factors = [np.eye(m)] * k
    else:
        cov = np.asarray(cov, dtype=np.float64)
        if cov.ndim == 2:
            factors = [_covariance_factor(cov, m)] * k
        else:
            factors = [_covariance_factor(cov[c], m) for c in range(k)]
    rng = np.random.default_rng(seed)
    blocks = []
    labels = []
    for c in range(k):
        z = rng.standard_normal((counts[c], m))
        blocks.append(means[c] + z @ factors[c].T)
        labels += [c] * counts[c]
    return LabeledDataset(
        features=np.vstack(blocks),
        labels=np.array(labels, dtype=np.int64),
        n_classes=k,
        feature_names=feature_names or [],
    )
