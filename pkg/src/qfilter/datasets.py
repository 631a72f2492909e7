"""Built-in data, CSV loading, PCA, image downsampling, synthetic blobs."""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ClassBalanceError, CsvError, DimError, ShapeError


@dataclass(frozen=True)
class RawDataset:
    """Feature matrix with +1/-1 labels; both classes must be present."""

    features: np.ndarray
    labels: np.ndarray
    name: str

    def __post_init__(self) -> None:
        f = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=int)
        if f.ndim != 2 or y.ndim != 1 or f.shape[0] != y.shape[0]:
            raise ShapeError(f"features {f.shape} vs labels {y.shape}")
        present = set(np.unique(y).tolist())
        if present != {+1, -1}:
            raise ClassBalanceError(f"need labels {{+1,-1}}, got {sorted(present)}")
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", y)

    def pairs(self) -> list[tuple[np.ndarray, int]]:
        return [(self.features[i], int(self.labels[i])) for i in range(len(self.labels))]


def iris_builtin() -> tuple[RawDataset, tuple[np.ndarray, int]]:
    """Two preprocessed iris training points and one test point, as printed."""
    train = RawDataset(
        features=np.array([[0.796, 0.607], [0.0, 1.0]]),
        labels=np.array([+1, -1]),
        name="iris-builtin",
    )
    test = (np.array([-0.557, 0.83]), -1)
    return train, test


def load_csv(path: str) -> RawDataset:
    """Header + float rows; `label` column in {+1,-1} or {0,1} (remapped)."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CsvError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if "label" not in header:
            raise CsvError(f"{path}: header has no `label` column")
        label_idx = header.index("label")
        feats: list[list[float]] = []
        labels: list[float] = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise CsvError(f"{path}:{line_no}: expected {len(header)} columns")
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise CsvError(f"{path}:{line_no}: {exc}") from exc
            labels.append(values.pop(label_idx))
            feats.append(values)
    if not feats:
        raise CsvError(f"{path}: no data rows")
    y = np.array(labels)
    if set(np.unique(y).tolist()) <= {0.0, 1.0}:
        warnings.warn(f"{path}: labels in {{0,1}} remapped to {{-1,+1}}")
        y = np.where(y == 0.0, -1.0, +1.0)
    if not set(np.unique(y).tolist()) <= {-1.0, +1.0}:
        raise CsvError(f"{path}: labels must be in {{+1,-1}} or {{0,1}}")
    return RawDataset(np.array(feats), y.astype(int), name=path)


@dataclass(frozen=True)
class PCAModel:
    """Mean plus top-k orthonormal covariance eigenvectors (columns)."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.components, dtype=float)
        gram = c.T @ c
        if not np.allclose(gram, np.eye(c.shape[1]), atol=1e-10, rtol=0):
            raise DimError("PCA components are not orthonormal")


def pca_fit(dataset: RawDataset, k: int) -> PCAModel:
    """Top-k eigenvectors of the sample covariance, deterministic signs.

    Each component is flipped so its largest-magnitude entry is positive.
    """
    x = dataset.features
    m, d = x.shape
    if not 1 <= k <= min(m, d):
        raise DimError(f"k={k} outside [1, min(M={m}, d={d})]")
    mean = x.mean(axis=0)
    xc = x - mean
    cov = xc.T @ xc / max(m - 1, 1)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:k]
    comps = evecs[:, order]
    var = evals[order]
    for j in range(k):
        pivot = np.argmax(np.abs(comps[:, j]))
        if comps[pivot, j] < 0:
            comps[:, j] = -comps[:, j]
    return PCAModel(mean, comps, var)


def pca_project(model: PCAModel, features: np.ndarray) -> np.ndarray:
    return (np.asarray(features, dtype=float) - model.mean) @ model.components


def pca_transform(model: PCAModel, dataset: RawDataset) -> RawDataset:
    k = model.components.shape[1]
    return RawDataset(
        pca_project(model, dataset.features),
        dataset.labels,
        name=f"{dataset.name}-pca{k}",
    )


def downsample_image(pixels: np.ndarray) -> np.ndarray:
    """28x28 -> 4x4 by averaging 7x7 blocks, row-major flattened."""
    p = np.asarray(pixels, dtype=float)
    if p.shape != (28, 28):
        raise ShapeError(f"expected a 28x28 grid, got {p.shape}")
    return p.reshape(4, 7, 4, 7).mean(axis=(1, 3)).ravel()


def synthetic_blobs(seed: int, m_per_class: int, dims: int, separation: float) -> RawDataset:
    """Two unit-variance Gaussian clusters split along the first axis."""
    if m_per_class < 1:
        raise DimError("need at least one sample per class")
    rng = np.random.default_rng(seed)
    pos = rng.standard_normal((m_per_class, dims))
    pos[:, 0] += separation / 2
    neg = rng.standard_normal((m_per_class, dims))
    neg[:, 0] -= separation / 2
    return RawDataset(
        np.vstack([pos, neg]),
        np.array([+1] * m_per_class + [-1] * m_per_class),
        name=f"blobs-s{seed}-m{m_per_class}-d{dims}-sep{separation:g}",
    )
