"""Competitor strategies: group-level SMOTE, group-level RUS, geographic concatenation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from masc.data_model import Dataset, concat, group_cardinalities, read_structured


@dataclass(frozen=True)
class RegionMap:
    region_of: Mapping[str, str]

    @classmethod
    def load(cls, path: str | Path) -> "RegionMap":
        raw = read_structured(path)
        raw = raw.get("region_of", raw)
        return cls({str(k): str(v) for k, v in raw.items()})

    def members(self, region: str, ids: Sequence[str]) -> list[str]:
        return [i for i in ids if self.region_of.get(i) == region]


@dataclass(frozen=True)
class SmoteProvenance:
    """For synthetic row j: base row, neighbour row (indices into the input) and u."""

    base: np.ndarray
    neighbor: np.ndarray
    u: np.ndarray


def group_smote(
    ds: Dataset,
    k_neighbors: int = 5,
    seed: int = 0,
    return_provenance: bool = False,
):
    """Oversample every minority group up to the majority count.

    Each synthetic row is ``x + u * (nb - x)`` for a random group member ``x``,
    one of its ``k_neighbors`` nearest same-group rows ``nb`` and
    ``u ~ U(0, 1)``. The target label is copied from ``x``.
    """
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be >= 1")
    counts = group_cardinalities(ds)
    n_l = int(counts.max())
    rng = np.random.default_rng(seed)

    bases, neighbors, us = [], [], []
    for g in range(ds.schema.n_groups):
        need = n_l - int(counts[g])
        if need <= 0:
            continue
        idx = np.flatnonzero(ds.group_labels == g)
        if len(idx) < 2:
            label = ds.schema.protected_groups[g]
            raise ValueError(f"group {label!r} has {len(idx)} row(s); SMOTE needs at least 2")
        k = min(k_neighbors, len(idx) - 1)
        x = ds.features[idx]
        dist = cdist(x, x)
        np.fill_diagonal(dist, np.inf)
        # stable sort keeps ties in row order
        knn = np.argsort(dist, axis=1, kind="stable")[:, :k]
        base_local = rng.integers(len(idx), size=need)
        nb_local = knn[base_local, rng.integers(k, size=need)]
        bases.append(idx[base_local])
        neighbors.append(idx[nb_local])
        us.append(rng.random(need))

    if not bases:
        out = ds
        prov = SmoteProvenance(np.empty(0, int), np.empty(0, int), np.empty(0))
    else:
        base = np.concatenate(bases)
        nb = np.concatenate(neighbors)
        u = np.concatenate(us)
        synth = ds.features[base] + u[:, None] * (ds.features[nb] - ds.features[base])
        extra = Dataset(
            id=ds.id,
            features=synth,
            group_labels=ds.group_labels[base],
            targets=ds.targets[base],
            schema=ds.schema,
            source_ids=np.full(len(base), "", dtype=object),
            source_rows=np.full(len(base), -1),
        )
        out = concat([ds, extra], id=ds.id)
        prov = SmoteProvenance(base, nb, u)
    return (out, prov) if return_provenance else out


def group_rus(ds: Dataset, seed: int = 0) -> Dataset:
    """Undersample every group to the size of the smallest one.

    Rows of the smallest group are kept as is; kept rows stay in input order.
    """
    counts = group_cardinalities(ds)
    if (counts == 0).any():
        empty = [ds.schema.protected_groups[g] for g in np.flatnonzero(counts == 0)]
        raise ValueError(f"group(s) {empty} are empty; nothing to undersample to")
    n_min = int(counts.min())
    rng = np.random.default_rng(seed)
    keep = []
    for g in range(ds.schema.n_groups):
        idx = np.flatnonzero(ds.group_labels == g)
        if len(idx) > n_min:
            idx = rng.choice(idx, size=n_min, replace=False)
        keep.append(idx)
    return ds.take(np.sort(np.concatenate(keep)))


def geo_concat(datasets: Sequence[Dataset], region_map: RegionMap, target_id: str) -> Dataset:
    """Target followed by every other dataset in its region, in input order."""
    by_id = {ds.id: ds for ds in datasets}
    if target_id not in by_id:
        raise ValueError(f"unknown target {target_id!r}")
    region = region_map.region_of.get(target_id)
    if region is None:
        raise ValueError(f"no region for target {target_id!r}")
    others = [by_id[i] for i in region_map.members(region, list(by_id)) if i != target_id]
    return concat([by_id[target_id], *others], id=target_id)
