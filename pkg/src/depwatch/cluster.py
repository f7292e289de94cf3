"""Unsupervised descriptive analysis: k-means clustering and PCA.

k-means standardizes features internally (z-score per column; zero-variance
columns become 0), so cluster assignments are invariant to positive rescaling
of any single feature. Returned centroids are mapped back to original units.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .features import FeatureVector


@dataclass(frozen=True)
class ClusteringConfig:
    k: int = 4
    max_iterations: int = 100
    seed: int = 0
    init: str = "kmeans++"

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("k must be >= 1")
        if self.init not in ("kmeans++", "first-k"):
            raise ValidationError(f"unknown init method {self.init!r}")


@dataclass(frozen=True)
class KMeansResult:
    assignments: tuple[int, ...]
    centroids: np.ndarray  # (k, n_features), original units
    inertia_history: tuple[float, ...]  # standardized space, one entry per iteration
    iterations: int
    converged: bool

    @property
    def inertia(self) -> float:
        return self.inertia_history[-1]


def _as_matrix(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        x = np.asarray(data, dtype=float)
    else:
        x = np.stack([fv.to_array() if isinstance(fv, FeatureVector) else np.asarray(fv, float) for fv in data])
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError("data must be a nonempty 2-D matrix of rows")
    return x


def _standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    safe = np.where(std > 0, std, 1.0)
    z = (x - mean) / safe
    z[:, std == 0] = 0.0
    return z, mean, safe


def _kmeans_pp_seeds(z: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = z.shape[0]
    centers = [int(rng.integers(0, n))]
    d2 = np.sum((z - z[centers[0]]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total == 0:
            # all remaining points coincide with a center; pick the first such row
            remaining = [i for i in range(n) if i not in centers]
            centers.append(remaining[0])
            continue
        probs = d2 / total
        centers.append(int(rng.choice(n, p=probs)))
        d2 = np.minimum(d2, np.sum((z - z[centers[-1]]) ** 2, axis=1))
    return z[centers].copy()


def kmeans(data, config: ClusteringConfig = ClusteringConfig()) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding; deterministic given the seed.

    Iterates until the assignment vector reaches a fixpoint or max_iterations.
    A cluster that loses all its points keeps its previous centroid.
    """
    x = _as_matrix(data)
    n = x.shape[0]
    if config.k > n:
        raise ValidationError(f"k={config.k} exceeds the {n} data rows")
    z, mean, scale = _standardize(x)
    rng = np.random.default_rng(config.seed)
    if config.init == "kmeans++":
        centers = _kmeans_pp_seeds(z, config.k, rng)
    else:
        centers = z[: config.k].copy()

    assignments = np.full(n, -1, dtype=int)
    history: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, config.max_iterations + 1):
        d2 = ((z[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assignments = np.argmin(d2, axis=1)  # ties: lowest cluster index
        history.append(float(d2[np.arange(n), new_assignments].sum()))
        if np.array_equal(new_assignments, assignments):
            converged = True
            break
        assignments = new_assignments
        for c in range(config.k):
            members = z[assignments == c]
            if len(members):
                centers[c] = members.mean(axis=0)

    return KMeansResult(
        assignments=tuple(int(a) for a in assignments),
        centroids=centers * scale + mean,
        inertia_history=tuple(history),
        iterations=iterations,
        converged=converged,
    )


@dataclass(frozen=True)
class PCAResult:
    components: np.ndarray  # (n_components, n_features), orthonormal rows
    explained_variance_ratio: tuple[float, ...]
    projected: np.ndarray  # (n_rows, n_components)
    mean: np.ndarray


def pca(data, n_components: int) -> PCAResult:
    """Top eigenvectors of the sample covariance of mean-centered data.

    Components are orthonormal with deterministic sign: each component's
    largest-magnitude entry is positive. Variance ratios are reported against
    total variance, so they sum to <= 1 for a partial decomposition.
    """
    x = _as_matrix(data)
    n, d = x.shape
    if n_components < 1 or n_components > d:
        raise ValidationError(f"n_components must lie in [1, {d}]")
    if n < 2:
        raise ValidationError("PCA needs at least two rows")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / (n - 1)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = np.clip(eigenvalues[order], 0.0, None)
    components = eigenvectors[:, order].T[:n_components]
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    total = eigenvalues.sum()
    ratios = eigenvalues[:n_components] / total if total > 0 else np.zeros(n_components)
    return PCAResult(
        components=components,
        explained_variance_ratio=tuple(float(r) for r in ratios),
        projected=centered @ components.T,
        mean=mean,
    )
