"""Minority-group augmentation from a cluster's shared instance pool."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from masc.data_model import Dataset, check_same_schema, concat, group_cardinalities


@dataclass(frozen=True)
class ClusterPool:
    """Rows shared by the other members of a cluster, indexed by protected group.

    ``per_group_instances[g]`` is a list of ``(donor_id, row_index)`` pairs in
    donor order, then row order.
    """

    cluster_id: int
    per_group_instances: dict[int, list[tuple[str, int]]]
    donors: dict[str, Dataset] = field(repr=False)

    @property
    def N_per_group(self) -> dict[int, int]:
        return {g: len(rows) for g, rows in self.per_group_instances.items()}

    @property
    def N(self) -> int:
        return sum(self.N_per_group.values())

    def rows(self, refs: Sequence[tuple[str, int]]) -> Dataset | None:
        if not refs:
            return None
        first = self.donors[refs[0][0]]
        features = np.array([self.donors[d].features[i] for d, i in refs])
        return Dataset(
            id="pool",
            features=features,
            group_labels=[self.donors[d].group_labels[i] for d, i in refs],
            targets=[self.donors[d].targets[i] for d, i in refs],
            schema=first.schema,
            source_ids=[self.donors[d].source_ids[i] for d, i in refs],
            source_rows=[self.donors[d].source_rows[i] for d, i in refs],
        )


@dataclass(frozen=True)
class AugmentationResult:
    augmented: Dataset
    borrowed: list[tuple[str, int]]
    per_group_before: np.ndarray
    per_group_after: np.ndarray
    shortfall: dict[int, int]
    clustering: object | None = None

    def provenance(self) -> dict:
        schema = self.augmented.schema
        return {
            "target": self.augmented.id,
            "groups": list(schema.protected_groups),
            "per_group_before": self.per_group_before.tolist(),
            "per_group_after": self.per_group_after.tolist(),
            "shortfall": {schema.protected_groups[g]: int(c) for g, c in sorted(self.shortfall.items())},
            "borrowed": [{"donor_id": d, "row": int(i)} for d, i in self.borrowed],
        }


def build_pool(cluster_members: Sequence[Dataset], exclude: str, cluster_id: int = 0) -> ClusterPool:
    """Pool every row of every cluster member except the target ``exclude``."""
    ids = [ds.id for ds in cluster_members]
    if exclude not in ids:
        raise ValueError(f"target {exclude!r} is not a member of cluster {cluster_id}")
    check_same_schema(cluster_members)
    p = cluster_members[0].schema.n_groups
    per_group: dict[int, list[tuple[str, int]]] = {g: [] for g in range(p)}
    donors = {}
    for ds in cluster_members:
        if ds.id == exclude:
            continue
        donors[ds.id] = ds
        for i, g in enumerate(ds.group_labels):
            per_group[int(g)].append((ds.id, i))
    return ClusterPool(cluster_id, per_group, donors)


def majority_group(counts: np.ndarray) -> int:
    # np.argmax returns the first maximum: ties go to the lowest group index
    return int(np.argmax(counts))


def augment(target: Dataset, pool: ClusterPool, seed: int = 0) -> AugmentationResult:
    """Top up every minority group of ``target`` toward the majority count.

    Group g receives ``min(n_l - n_g, N_g)`` rows drawn uniformly without
    replacement from the pool; any remaining gap is reported as shortfall.
    """
    if target.id in pool.donors:
        raise ValueError("the target's own rows must not be in its pool")
    before = group_cardinalities(target)
    l = majority_group(before)
    n_l = int(before[l])
    if n_l < 1:
        raise ValueError("target has no majority-group instance")

    rng = np.random.default_rng(seed)
    borrowed: list[tuple[str, int]] = []
    shortfall: dict[int, int] = {}
    for g in range(target.schema.n_groups):
        if g == l:
            continue
        need = n_l - int(before[g])
        if need <= 0:
            continue
        available = pool.per_group_instances.get(g, [])
        if len(available) >= need:
            picks = rng.choice(len(available), size=need, replace=False)
        else:
            picks = rng.permutation(len(available))
            shortfall[g] = need - len(available)
        borrowed.extend(available[int(i)] for i in picks)

    extra = pool.rows(borrowed)
    if extra is None:
        augmented = target
    else:
        augmented = concat([target, extra], id=target.id)
    after = group_cardinalities(augmented)
    return AugmentationResult(augmented, borrowed, before, after, shortfall)
