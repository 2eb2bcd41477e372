"""Unnormalized spectral clustering with eigengap selection of k."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from masc.affinity import AffinityMatrix

DEFAULT_L_MAX = 10


@dataclass(frozen=True)
class LaplacianDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class ClusterAssignment:
    labels: np.ndarray
    k: int
    eigengap_vector: np.ndarray
    dataset_ids: tuple[str, ...]

    def as_mapping(self) -> dict[str, int]:
        return {ds_id: int(c) for ds_id, c in zip(self.dataset_ids, self.labels)}

    def members(self, cluster: int) -> list[str]:
        return [ds_id for ds_id, c in zip(self.dataset_ids, self.labels) if c == cluster]

    def cluster_of(self, dataset_id: str) -> int:
        return int(self.labels[self.dataset_ids.index(dataset_id)])


def laplacian(a: AffinityMatrix | np.ndarray) -> np.ndarray:
    """L = D - A with D the diagonal degree matrix."""
    values = np.asarray(a.values if isinstance(a, AffinityMatrix) else a, dtype=float)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValueError("affinity must be square")
    return np.diag(values.sum(axis=1)) - values


def decompose(lap: np.ndarray, clamp_tol: float = 1e-9) -> LaplacianDecomposition:
    """Full ascending spectrum of a symmetric Laplacian.

    Uses the symmetric eigensolver: for a symmetric PSD matrix the singular
    values coincide with the eigenvalues, and eigh returns them already
    ordered without SVD's sign/ordering ambiguity.
    """
    lap = np.asarray(lap, dtype=float)
    if lap.ndim != 2 or lap.shape[0] != lap.shape[1]:
        raise ValueError("Laplacian must be square")
    if np.abs(lap - lap.T).max(initial=0.0) > 1e-10:
        raise ValueError("Laplacian is not symmetric")
    vals, vecs = np.linalg.eigh(lap)
    tol = clamp_tol * max(1.0, float(np.abs(vals).max(initial=0.0)))
    vals = np.where((vals < 0) & (vals > -tol), 0.0, vals)
    return LaplacianDecomposition(vals, vecs)


def eigengap_vector(eigenvalues: np.ndarray, l_max: int) -> np.ndarray:
    """[lambda_2 - lambda_1, ..., lambda_l - lambda_{l-1}] over the first l_max values."""
    return np.diff(np.asarray(eigenvalues, dtype=float)[:l_max])


def select_k(d: LaplacianDecomposition, l_max: int | None = None) -> tuple[int, np.ndarray]:
    """Number of clusters = position of the largest consecutive eigenvalue gap.

    A gap between the k-th and (k+1)-th smallest eigenvalue gives k. Ties go
    to the smallest k.
    """
    r = len(d.eigenvalues)
    if r < 2:
        raise ValueError("eigengap selection needs at least 2 datasets")
    l_max = min(r, DEFAULT_L_MAX) if l_max is None else int(l_max)
    if not 2 <= l_max <= r:
        raise ValueError(f"l_max must lie in [2, {r}], got {l_max}")
    gaps = eigengap_vector(d.eigenvalues, l_max)
    return int(np.argmax(gaps)) + 1, gaps


def _relabel(labels: np.ndarray) -> np.ndarray:
    # canonical labels: order of first appearance
    mapping: dict[int, int] = {}
    return np.array([mapping.setdefault(int(c), len(mapping)) for c in labels], dtype=np.int64)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = len(x)
    centers = [x[rng.integers(n)]]
    d2 = ((x - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers.append(x[idx])
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centers)


def _assign(x: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d2 = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    return labels, d2[np.arange(len(x)), labels]


def kmeans(
    x: np.ndarray,
    k: int,
    seed: int = 0,
    n_init: int = 10,
    max_iter: int = 300,
    tol: float = 1e-6,
) -> tuple[np.ndarray, float]:
    """Lloyd's k-means with k-means++ seeding; best inertia over ``n_init`` runs.

    Empty clusters are re-seeded with the point farthest from its centroid, so
    every label in [0, k) is used whenever there are at least k distinct rows.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    best_labels, best_inertia = None, np.inf
    for _ in range(n_init):
        centers = _kmeans_pp_init(x, k, rng)
        for _ in range(max_iter):
            labels, dist = _assign(x, centers)
            new = centers.copy()
            for c in range(k):
                members = labels == c
                if members.any():
                    new[c] = x[members].mean(axis=0)
                else:
                    far = int(dist.argmax())
                    new[c] = x[far]
                    dist[far] = 0.0
            shift = np.sqrt(((new - centers) ** 2).sum(axis=1)).max()
            centers = new
            if shift <= tol:
                break
        labels, dist = _assign(x, centers)
        inertia = float(dist.sum())
        if inertia < best_inertia - 1e-12:
            best_labels, best_inertia = labels, inertia
    return _relabel(best_labels), best_inertia


def spectral_embedding(d: LaplacianDecomposition, k: int) -> np.ndarray:
    """r x k matrix of eigenvectors for the k smallest eigenvalues."""
    return np.asarray(d.eigenvectors)[:, :k]


def embed_and_cluster(
    d: LaplacianDecomposition,
    k: int,
    seed: int = 0,
    dataset_ids: tuple[str, ...] | None = None,
    l_max: int | None = None,
) -> ClusterAssignment:
    r = len(d.eigenvalues)
    if not 1 <= k <= r:
        raise ValueError(f"k must lie in [1, {r}], got {k}")
    dataset_ids = tuple(dataset_ids) if dataset_ids is not None else tuple(str(i) for i in range(r))
    if k == 1:
        labels = np.zeros(r, dtype=np.int64)
    elif k == r:
        labels = np.arange(r, dtype=np.int64)
    else:
        labels, _ = kmeans(spectral_embedding(d, k), k, seed=seed)
    l_max = min(r, DEFAULT_L_MAX) if l_max is None else l_max
    return ClusterAssignment(labels, int(k), eigengap_vector(d.eigenvalues, l_max), dataset_ids)
