"""Seeded synthetic dataset families with planted covariate shift and group imbalance."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from masc.data_model import Dataset, Schema, read_structured

GROUPS = ("White", "Black", "Other")


def default_schema(d: int, groups: Sequence[str] = GROUPS) -> Schema:
    return Schema(
        feature_names=[f"x{j}" for j in range(d)],
        protected_attribute="race",
        protected_groups=list(groups),
        aggregation_map={g: g for g in groups},
        target="label",
        positive_label="1",
    )


@dataclass(frozen=True)
class BenchmarkSpec:
    """Families of datasets; family f draws features around mean_f.

    ``group_ratios`` and ``positive_rates`` hold one vector per dataset, or a
    single vector shared by all. ``extra_datasets`` are appended round-robin
    to the families (5 x 10 + 1 gives 51 datasets).
    """

    n_families: int = 5
    datasets_per_family: int = 10
    d: int = 4
    samples: tuple[int, int] = (500, 500)
    shift: float = 5.0
    group_ratios: tuple = ((0.8, 0.1, 0.1),)
    positive_rates: tuple = ((0.4, 0.3, 0.3),)
    label_noise: float = 1.0
    extra_datasets: int = 0
    seed: int = 0
    groups: tuple[str, ...] = GROUPS

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(int(s) for s in self.samples))
        object.__setattr__(self, "group_ratios", tuple(tuple(float(v) for v in r) for r in self.group_ratios))
        object.__setattr__(self, "positive_rates", tuple(tuple(float(v) for v in r) for r in self.positive_rates))
        object.__setattr__(self, "groups", tuple(self.groups))
        p = len(self.groups)
        if self.n_families < 1 or self.datasets_per_family < 1 or self.d < 1:
            raise ValueError("n_families, datasets_per_family and d must be positive")
        lo, hi = self.samples
        if not 2 <= lo <= hi:
            raise ValueError("samples must be a range (lo, hi) with 2 <= lo <= hi")
        if self.shift < 0:
            raise ValueError("shift must be non-negative")
        for ratios in self.group_ratios:
            r = np.asarray(ratios)
            if len(r) != p or (r < 0).any() or abs(r.sum() - 1) > 1e-9:
                raise ValueError(f"group ratios {ratios} are not a simplex vector of length {p}")
        for rates in self.positive_rates:
            r = np.asarray(rates)
            if len(r) != p or (r <= 0).any() or (r >= 1).any():
                raise ValueError(f"positive rates {rates} must lie strictly inside (0, 1)")
        n = self.n_datasets
        for name in ("group_ratios", "positive_rates"):
            if len(getattr(self, name)) not in (1, n):
                raise ValueError(f"{name} needs 1 or {n} entries")

    @property
    def n_datasets(self) -> int:
        return self.n_families * self.datasets_per_family + self.extra_datasets

    def family_of(self, i: int) -> int:
        base = self.n_families * self.datasets_per_family
        return i // self.datasets_per_family if i < base else (i - base) % self.n_families

    @classmethod
    def from_dict(cls, raw: dict) -> "BenchmarkSpec":
        raw = dict(raw)
        for key in ("group_ratios", "positive_rates"):
            if key in raw and raw[key] and not isinstance(raw[key][0], (list, tuple)):
                raw[key] = [raw[key]]
        return cls(**raw)

    @classmethod
    def load(cls, path: str | Path) -> "BenchmarkSpec":
        return cls.from_dict(read_structured(path))


def family_means(n_families: int, d: int, shift: float, rng: np.random.Generator) -> np.ndarray:
    """Family centres with every pairwise distance equal to ``shift``.

    Uses the vertices of a regular simplex when it fits in ``d`` dimensions,
    otherwise random directions rescaled so the closest pair is ``shift`` apart.
    """
    if n_families == 1:
        return np.zeros((1, d))
    if n_families - 1 <= d:
        # centred standard basis of R^F is a regular simplex with edge sqrt(2)
        basis = np.eye(n_families) - 1.0 / n_families
        q, _ = np.linalg.qr(basis[:, : n_families - 1])
        verts = basis @ q  # F x (F-1), same pairwise distances
        out = np.zeros((n_families, d))
        out[:, : n_families - 1] = verts * (shift / np.sqrt(2.0))
        return out
    pts = rng.standard_normal((n_families, d))
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    closest = dist[~np.eye(n_families, dtype=bool)].min()
    return pts * (shift / closest)


@dataclass
class Benchmark:
    spec: BenchmarkSpec
    datasets: list[Dataset]
    families: list[int]
    means: np.ndarray = field(repr=False)

    def region_map(self) -> dict[str, str]:
        """Regions that cut across families: dataset i goes to region i mod F."""
        return {ds.id: f"R{i % self.spec.n_families}" for i, ds in enumerate(self.datasets)}


def generate(spec: BenchmarkSpec) -> Benchmark:
    """Draw every dataset of the benchmark.

    Inside family f the label rule is shared by all groups,
    ``y = 1[w.(x - mean_f) + noise > 0]``, so only P(X) varies (covariate
    shift). Group g is offset along ``w`` by the amount that gives it its
    requested positive rate.
    """
    rng = np.random.default_rng(spec.seed)
    p = len(spec.groups)
    schema = default_schema(spec.d, spec.groups)
    means = family_means(spec.n_families, spec.d, spec.shift, rng)
    direction = rng.standard_normal(spec.d)
    direction /= np.linalg.norm(direction)
    spread = np.sqrt(1.0 + spec.label_noise**2)

    datasets, families = [], []
    width = len(str(spec.n_datasets - 1))
    for i in range(spec.n_datasets):
        f = spec.family_of(i)
        ratios = np.asarray(spec.group_ratios[i if len(spec.group_ratios) > 1 else 0])
        rates = np.asarray(spec.positive_rates[i if len(spec.positive_rates) > 1 else 0])
        # score | g ~ N(offset_g, spread^2) and the cut is 0
        offsets = spread * ndtri(rates)
        n = int(rng.integers(spec.samples[0], spec.samples[1] + 1))
        groups = rng.choice(p, size=n, p=ratios)
        x = means[f] + rng.standard_normal((n, spec.d)) + offsets[groups][:, None] * direction
        score = (x - means[f]) @ direction + spec.label_noise * rng.standard_normal(n)
        y = (score > 0).astype(np.int64)
        datasets.append(Dataset(f"ds{i:0{width}d}", x, groups, y, schema))
        families.append(f)
    return Benchmark(spec, datasets, families, means)
