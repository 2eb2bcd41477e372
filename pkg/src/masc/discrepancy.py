"""Unbiased two-sample MMD and the pairwise distance matrix between datasets."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Literal, Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from masc.data_model import Dataset, check_same_schema

_CHUNK = 2048


@dataclass(frozen=True)
class KernelSpec:
    kind: Literal["linear", "gaussian"] = "linear"
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "gaussian"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "gaussian" and self.gamma is not None and not self.gamma > 0:
            raise ValueError("gaussian kernel gamma must be positive")

    def __call__(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        if self.kind == "linear":
            return a @ b.T
        if self.gamma is None:
            raise ValueError("gaussian kernel gamma is unresolved; see median_heuristic_gamma")
        return np.exp(-self.gamma * cdist(a, b, "sqeuclidean"))


def median_heuristic_gamma(samples: np.ndarray, max_rows: int = 1000, seed: int = 0) -> float:
    """1 / (2 * median^2) of pairwise Euclidean distances on a row subsample."""
    samples = np.asarray(samples, dtype=float)
    if len(samples) > max_rows:
        rng = np.random.default_rng(seed)
        samples = samples[np.sort(rng.choice(len(samples), max_rows, replace=False))]
    med = float(np.median(pdist(samples)))
    if med <= 0:
        return 1.0
    return 1.0 / (2.0 * med * med)


def _kernel_sum(a: np.ndarray, b: np.ndarray, kernel: KernelSpec) -> float:
    total = 0.0
    for i in range(0, len(a), _CHUNK):
        for j in range(0, len(b), _CHUNK):
            total += float(kernel(a[i : i + _CHUNK], b[j : j + _CHUNK]).sum())
    return total


def _self_sum(a: np.ndarray, kernel: KernelSpec) -> float:
    """Sum of k(a_i, a_j) over i != j."""
    if kernel.kind == "linear":
        s = a.sum(axis=0)
        return float(s @ s - np.einsum("ij,ij->", a, a))
    # gaussian: k(a, a) = 1 on the diagonal
    return _kernel_sum(a, a, kernel) - len(a)


def mmd(x: np.ndarray, z: np.ndarray, kernel: KernelSpec | None = None) -> float:
    """Unbiased two-sample MMD estimate, clamped at zero.

    Within-sample sums skip i == j and are divided by n(n-1) and m(m-1); the
    cross term is divided by n*m.
    """
    kernel = kernel or KernelSpec()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = np.atleast_2d(np.asarray(z, dtype=float))
    n, m = len(x), len(z)
    if n < 2 or m < 2:
        raise ValueError(f"unbiased MMD needs at least 2 rows per sample (got {n} and {m})")
    if x.shape[1] != z.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {z.shape[1]}")

    xx = _self_sum(x, kernel) / (n * (n - 1))
    zz = _self_sum(z, kernel) / (m * (m - 1))
    if kernel.kind == "linear":
        xz = float(x.sum(axis=0) @ z.sum(axis=0)) / (n * m)
    else:
        xz = _kernel_sum(x, z, kernel) / (n * m)
    # (xx + zz) first so swapping the arguments gives the identical float
    return max((xx + zz) - 2.0 * xz, 0.0)


@dataclass(frozen=True)
class DistanceMatrix:
    values: np.ndarray
    dataset_ids: tuple[str, ...]

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.dataset_ids):
            raise ValueError("distance matrix must be r x r with r dataset ids")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "dataset_ids", tuple(self.dataset_ids))

    @property
    def r(self) -> int:
        return len(self.dataset_ids)

    def to_dict(self) -> dict:
        return {"dataset_ids": list(self.dataset_ids), "values": self.values.tolist()}

    def to_csv(self) -> str:
        from masc.io import csv_text

        return csv_text(self.dataset_ids, [[float(v) for v in row] for row in self.values])

    @classmethod
    def from_dict(cls, raw: dict) -> "DistanceMatrix":
        return cls(values=np.asarray(raw["values"], dtype=float), dataset_ids=raw["dataset_ids"])


def min_max_normalize(values: np.ndarray) -> np.ndarray:
    """Min-max scale the off-diagonal entries into [0, 1]; the diagonal stays 0.

    When every off-diagonal entry is equal the matrix is divided by that value
    instead (so a positive constant maps to 1, zeros stay 0).
    """
    values = np.array(values, dtype=float)
    r = len(values)
    off = ~np.eye(r, dtype=bool)
    if r < 2:
        return values
    lo, hi = values[off].min(), values[off].max()
    if hi > lo:
        values[off] = (values[off] - lo) / (hi - lo)
    elif hi > 0:
        values[off] = values[off] / hi
    np.fill_diagonal(values, 0.0)
    return values


def default_threads() -> int:
    raw = os.environ.get("MASC_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def resolve_kernel(datasets: Sequence[Dataset], kernel: KernelSpec, seed: int = 0) -> KernelSpec:
    if kernel.kind == "gaussian" and kernel.gamma is None:
        pooled = np.vstack([ds.features for ds in datasets])
        return KernelSpec("gaussian", median_heuristic_gamma(pooled, seed=seed))
    return kernel


def pairwise_distance_matrix(
    datasets: Sequence[Dataset],
    kernel: KernelSpec | None = None,
    normalize: bool = True,
    threads: int | None = None,
) -> DistanceMatrix:
    """Symmetric matrix of MMD values between every pair of datasets.

    Each unordered pair is evaluated once; pairs run on a thread pool capped by
    ``threads`` (default ``$MASC_THREADS``).
    """
    if len(datasets) < 2:
        raise ValueError("need at least 2 datasets for a distance matrix")
    check_same_schema(datasets)
    ids = [ds.id for ds in datasets]
    if len(set(ids)) != len(ids):
        raise ValueError("dataset ids must be unique")
    kernel = resolve_kernel(datasets, kernel or KernelSpec())

    r = len(datasets)
    pairs = list(combinations(range(r), 2))
    threads = threads or default_threads()

    def one(pair):
        i, j = pair
        return mmd(datasets[i].features, datasets[j].features, kernel)

    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, pairs))
    else:
        results = [one(p) for p in pairs]

    w = np.zeros((r, r))
    for (i, j), v in zip(pairs, results):
        w[i, j] = w[j, i] = v
    if normalize:
        w = min_max_normalize(w)
    return DistanceMatrix(w, ids)
