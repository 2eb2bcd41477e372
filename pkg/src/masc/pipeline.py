"""End-to-end procedure: distances, affinity, spectral clustering, augmentation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from masc.affinity import DEFAULT_GAMMA, AffinityMatrix, to_affinity
from masc.augmentation import AugmentationResult, augment, build_pool
from masc.data_model import Dataset, joint_scale, standard_scale
from masc.discrepancy import DistanceMatrix, KernelSpec, pairwise_distance_matrix
from masc.spectral import (
    ClusterAssignment,
    LaplacianDecomposition,
    decompose,
    embed_and_cluster,
    laplacian,
    select_k,
)


@dataclass(frozen=True)
class PipelineConfig:
    kernel: KernelSpec = KernelSpec()
    gamma: float = DEFAULT_GAMMA
    normalize: bool = True
    k: int | Literal["auto"] = "auto"
    l_max: int | None = None
    scale: Literal["joint", "per_dataset", "none"] = "joint"
    cluster_seed: int = 42
    augment_seed: int = 42
    threads: int | None = None


@dataclass(frozen=True)
class ClusteringResult:
    distances: DistanceMatrix
    affinity: AffinityMatrix
    laplacian: np.ndarray
    decomposition: LaplacianDecomposition
    assignment: ClusterAssignment

    @property
    def k(self) -> int:
        return self.assignment.k


def prepare(datasets: Sequence[Dataset], scale: str) -> list[Dataset]:
    if scale == "joint":
        return joint_scale(datasets)
    if scale == "per_dataset":
        return [standard_scale(ds) for ds in datasets]
    if scale == "none":
        return list(datasets)
    raise ValueError(f"unknown scaling mode {scale!r}")


def cluster_from_distances(w: DistanceMatrix, config: PipelineConfig) -> ClusteringResult:
    a = to_affinity(w, config.gamma)
    lap = laplacian(a)
    dec = decompose(lap)
    r = w.r
    l_max = min(r, 10) if config.l_max is None else min(config.l_max, r)
    if config.k == "auto":
        k, _ = select_k(dec, l_max)
    else:
        k = int(config.k)
    assignment = embed_and_cluster(dec, k, seed=config.cluster_seed, dataset_ids=w.dataset_ids, l_max=l_max)
    return ClusteringResult(w, a, lap, dec, assignment)


def cluster_datasets(datasets: Sequence[Dataset], config: PipelineConfig | None = None) -> ClusteringResult:
    config = config or PipelineConfig()
    scaled = prepare(datasets, config.scale)
    w = pairwise_distance_matrix(scaled, config.kernel, config.normalize, config.threads)
    return cluster_from_distances(w, config)


def augment_in_cluster(
    datasets: Sequence[Dataset],
    target: Dataset,
    assignment: ClusterAssignment,
    seed: int,
) -> AugmentationResult:
    """Augment ``target`` (possibly a row subset of a clustered dataset) from its cluster."""
    c = assignment.cluster_of(target.id)
    members = set(assignment.members(c))
    cluster = [target] + [ds for ds in datasets if ds.id in members and ds.id != target.id]
    pool = build_pool(cluster, exclude=target.id, cluster_id=c)
    return augment(target, pool, seed)


def run_pipeline(
    datasets: Sequence[Dataset],
    target_id: str,
    config: PipelineConfig | None = None,
    clustering: ClusteringResult | None = None,
) -> AugmentationResult:
    """Cluster all datasets and augment ``target_id`` from its cluster's pool.

    Clustering runs on scaled copies (``config.scale``); borrowed rows come
    from the datasets as passed in. The returned result carries the
    clustering artefacts in ``.clustering``.
    """
    config = config or PipelineConfig()
    by_id = {ds.id: ds for ds in datasets}
    if target_id not in by_id:
        raise ValueError(f"unknown target {target_id!r}")
    if clustering is None:
        clustering = cluster_datasets(datasets, config)
    result = augment_in_cluster(datasets, by_id[target_id], clustering.assignment, config.augment_seed)
    return AugmentationResult(
        result.augmented,
        result.borrowed,
        result.per_group_before,
        result.per_group_after,
        result.shortfall,
        clustering=clustering,
    )
