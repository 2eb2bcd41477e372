"""Tabular dataset abstraction, CSV ingestion and standard scaling."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
import yaml

logger = logging.getLogger(__name__)

MISSING_TOKENS = frozenset({"", "na", "nan", "null", "none", "?"})
SCHEMA_KEYS = (
    "feature_names",
    "protected_attribute",
    "protected_groups",
    "aggregation_map",
    "target",
    "positive_label",
)


class SchemaError(ValueError):
    """Raised when a schema or a file does not conform to it."""


@dataclass(frozen=True)
class Schema:
    feature_names: tuple[str, ...]
    protected_attribute: str
    protected_groups: tuple[str, ...]
    aggregation_map: Mapping[str, str]
    target: str
    positive_label: str

    def __post_init__(self):
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "protected_groups", tuple(self.protected_groups))
        object.__setattr__(
            self, "aggregation_map", {str(k): str(v) for k, v in self.aggregation_map.items()}
        )
        if not self.feature_names:
            raise SchemaError("schema needs at least one feature")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise SchemaError("duplicate feature names")
        for col in (self.protected_attribute, self.target):
            if col in self.feature_names:
                raise SchemaError(f"column {col!r} cannot be both a feature and the protected/target column")
        if len(self.protected_groups) < 2:
            raise SchemaError("protected_groups needs at least 2 entries")
        if len(set(self.protected_groups)) != len(self.protected_groups):
            raise SchemaError("duplicate protected group labels")
        unknown = sorted(set(self.aggregation_map.values()) - set(self.protected_groups))
        if unknown:
            raise SchemaError(f"aggregation_map targets unknown groups: {unknown}")

    @property
    def n_groups(self) -> int:
        return len(self.protected_groups)

    def group_index(self, raw_category: str) -> int:
        try:
            label = self.aggregation_map[raw_category]
        except KeyError:
            raise SchemaError(
                f"unmapped category {raw_category!r} in protected column {self.protected_attribute!r}"
            ) from None
        return self.protected_groups.index(label)

    @classmethod
    def from_dict(cls, raw: Mapping) -> "Schema":
        missing = [k for k in SCHEMA_KEYS if k not in raw]
        if missing:
            raise SchemaError(f"schema is missing keys: {missing}")
        return cls(
            feature_names=list(raw["feature_names"]),
            protected_attribute=str(raw["protected_attribute"]),
            protected_groups=[str(g) for g in raw["protected_groups"]],
            aggregation_map=dict(raw["aggregation_map"]),
            target=str(raw["target"]),
            positive_label=str(raw["positive_label"]),
        )

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "protected_attribute": self.protected_attribute,
            "protected_groups": list(self.protected_groups),
            "aggregation_map": dict(self.aggregation_map),
            "target": self.target,
            "positive_label": self.positive_label,
        }


def read_structured(path: str | Path) -> dict:
    """Read a JSON or YAML mapping (chosen by file suffix)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
    else:
        data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected a mapping at top level")
    return data


def load_schema(path: str | Path) -> Schema:
    return Schema.from_dict(read_structured(path))


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """One task: features, protected group indices and binary targets.

    ``source_ids``/``source_rows`` record where each row came from; synthetic
    rows carry an empty source id and row ``-1``.
    """

    id: str
    features: np.ndarray
    group_labels: np.ndarray
    targets: np.ndarray
    schema: Schema
    source_ids: np.ndarray | None = None
    source_rows: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n, d = x.shape
        if n < 1:
            raise ValueError(f"dataset {self.id!r} is empty")
        if d != len(self.schema.feature_names):
            raise ValueError(f"dataset {self.id!r}: {d} columns but schema lists {len(self.schema.feature_names)}")
        g = np.asarray(self.group_labels, dtype=np.int64)
        y = np.asarray(self.targets, dtype=np.int64)
        if g.shape != (n,) or y.shape != (n,):
            raise ValueError("group_labels and targets must have one entry per row")
        if g.min() < 0 or g.max() >= self.schema.n_groups:
            raise ValueError("group index out of range")
        if not np.isin(y, (0, 1)).all():
            raise ValueError("targets must be 0/1")
        src = np.full(n, self.id, dtype=object) if self.source_ids is None else np.asarray(self.source_ids, dtype=object)
        rows = np.arange(n) if self.source_rows is None else np.asarray(self.source_rows, dtype=np.int64)
        if src.shape != (n,) or rows.shape != (n,):
            raise ValueError("provenance arrays must have one entry per row")
        object.__setattr__(self, "features", _freeze(x))
        object.__setattr__(self, "group_labels", _freeze(g))
        object.__setattr__(self, "targets", _freeze(y))
        object.__setattr__(self, "source_ids", _freeze(src))
        object.__setattr__(self, "source_rows", _freeze(rows))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    def take(self, idx: Sequence[int] | np.ndarray, id: str | None = None) -> "Dataset":
        """Row subset, provenance preserved."""
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(
            id=self.id if id is None else id,
            features=self.features[idx],
            group_labels=self.group_labels[idx],
            targets=self.targets[idx],
            schema=self.schema,
            source_ids=self.source_ids[idx],
            source_rows=self.source_rows[idx],
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        return replace(self, features=features, meta=dict(self.meta))


def concat(parts: Sequence[Dataset], id: str) -> Dataset:
    """Stack datasets sharing a schema, keeping row provenance."""
    if not parts:
        raise ValueError("nothing to concatenate")
    schema = parts[0].schema
    for p in parts[1:]:
        if p.schema != schema:
            raise SchemaError(f"schema mismatch between {parts[0].id!r} and {p.id!r}")
    return Dataset(
        id=id,
        features=np.vstack([p.features for p in parts]),
        group_labels=np.concatenate([p.group_labels for p in parts]),
        targets=np.concatenate([p.targets for p in parts]),
        schema=schema,
        source_ids=np.concatenate([p.source_ids for p in parts]),
        source_rows=np.concatenate([p.source_rows for p in parts]),
    )


class CategoryEncoder:
    """Ordinal codes by first appearance, shared by every file loaded with it."""

    def __init__(self):
        self.codes: dict[str, dict[str, int]] = {}
        self.numeric: set[str] = set()

    def encode(self, column: str, values: pd.Series) -> np.ndarray:
        if column not in self.codes:
            parsed = pd.to_numeric(values, errors="coerce")
            if not parsed.isna().any():
                self.numeric.add(column)
                return parsed.to_numpy(dtype=float)
            if column in self.numeric:
                bad = values[parsed.isna()].iloc[0]
                raise SchemaError(f"column {column!r} was numeric in earlier files but contains {bad!r}")
            self.codes[column] = {}
        table = self.codes[column]
        out = np.empty(len(values), dtype=float)
        for i, v in enumerate(values):
            out[i] = table.setdefault(v, len(table))
        return out


def load_csv(
    path: str | Path,
    schema: Schema,
    encoder: CategoryEncoder | None = None,
    dataset_id: str | None = None,
) -> Dataset:
    """Load one CSV into a :class:`Dataset`.

    Rows with a missing value in any schema column are dropped; the count is
    stored in ``meta["rows_dropped"]``. Pass the same ``encoder`` to every
    call so categorical codes agree across datasets.
    """
    path = Path(path)
    encoder = encoder if encoder is not None else CategoryEncoder()
    dataset_id = dataset_id or path.stem
    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    frame.columns = [c.strip() for c in frame.columns]
    columns = [*schema.feature_names, schema.protected_attribute, schema.target]
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")
    frame = frame[columns].apply(lambda s: s.str.strip())
    is_missing = frame.apply(lambda s: s.str.lower().isin(MISSING_TOKENS)).any(axis=1)
    dropped = int(is_missing.sum())
    frame = frame.loc[~is_missing].reset_index(drop=True)
    if frame.empty:
        raise SchemaError(f"{path}: no rows left after dropping {dropped} incomplete rows")
    if dropped:
        logger.info("%s: dropped %d rows with missing values", path, dropped)

    features = np.column_stack([encoder.encode(c, frame[c]) for c in schema.feature_names])
    groups = np.array([schema.group_index(v) for v in frame[schema.protected_attribute]], dtype=np.int64)
    targets = (frame[schema.target] == schema.positive_label).to_numpy(dtype=np.int64)
    return Dataset(
        id=dataset_id,
        features=features,
        group_labels=groups,
        targets=targets,
        schema=schema,
        meta={"rows_dropped": dropped, "rows_loaded": len(frame)},
    )


def load_many(paths: Mapping[str, str | Path], schema: Schema) -> list[Dataset]:
    encoder = CategoryEncoder()
    return [load_csv(p, schema, encoder, dataset_id=i) for i, p in paths.items()]


@dataclass(frozen=True)
class ScaleStats:
    mean: np.ndarray
    std: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "ScaleStats":
        features = np.asarray(features, dtype=float)
        # population std (ddof=0)
        return cls(mean=features.mean(axis=0), std=features.std(axis=0))

    def apply(self, features: np.ndarray) -> np.ndarray:
        out = np.asarray(features, dtype=float) - self.mean
        varying = self.std > 0
        out[:, varying] /= self.std[varying]
        out[:, ~varying] = 0.0
        return out


def standard_scale(ds: Dataset, stats: ScaleStats | None = None) -> Dataset:
    """z = (x - mean) / std per column, constant columns become 0.

    With ``stats=None`` the statistics come from ``ds`` itself.
    """
    if stats is None:
        if ds.n < 2:
            raise ValueError("standard_scale needs at least 2 rows")
        stats = ScaleStats.fit(ds.features)
    return ds.with_features(stats.apply(ds.features))


def joint_scale(datasets: Sequence[Dataset]) -> list[Dataset]:
    """Scale every dataset with statistics pooled over all of them.

    Per-dataset scaling would erase the mean shifts between datasets that the
    discrepancy measure is supposed to detect.
    """
    stats = ScaleStats.fit(np.vstack([ds.features for ds in datasets]))
    return [standard_scale(ds, stats) for ds in datasets]


def group_cardinalities(ds: Dataset) -> np.ndarray:
    return np.bincount(ds.group_labels, minlength=ds.schema.n_groups)


def write_csv(ds: Dataset, path: str | Path, with_provenance: bool = False) -> None:
    """Write a dataset back to CSV; targets as 1/0, groups as their labels.

    Reload the file with :func:`output_schema` of the original schema.
    """
    from masc.io import write_csv_rows

    schema = ds.schema
    header = [*schema.feature_names, schema.protected_attribute, schema.target]
    if with_provenance:
        header += ["source_id", "source_row"]
    rows = []
    for i in range(ds.n):
        row: list = [float(v) for v in ds.features[i]]
        row += [schema.protected_groups[ds.group_labels[i]], int(ds.targets[i])]
        if with_provenance:
            row += [str(ds.source_ids[i]), int(ds.source_rows[i])]
        rows.append(row)
    write_csv_rows(path, header, rows)


def output_schema(schema: Schema) -> Schema:
    """Schema describing files produced by :func:`write_csv`."""
    return Schema(
        feature_names=schema.feature_names,
        protected_attribute=schema.protected_attribute,
        protected_groups=schema.protected_groups,
        aggregation_map={g: g for g in schema.protected_groups},
        target=schema.target,
        positive_label="1",
    )


def check_same_schema(datasets: Iterable[Dataset]) -> None:
    datasets = list(datasets)
    for ds in datasets[1:]:
        if ds.schema != datasets[0].schema or ds.d != datasets[0].d:
            raise SchemaError(f"dataset {ds.id!r} does not share the schema of {datasets[0].id!r}")
