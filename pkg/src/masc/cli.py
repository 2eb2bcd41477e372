"""Command line interface: ``masc cluster | augment | evaluate | report``.

Exit codes: 0 success, 1 runtime failure, 2 configuration/validation failure.
"""

from __future__ import annotations

import argparse
import glob
import hashlib
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from masc import __version__
from masc.affinity import DEFAULT_GAMMA
from masc.augmentation import AugmentationResult
from masc.baselines import RegionMap, geo_concat, group_rus, group_smote
from masc.benchmark import BenchmarkSpec, generate
from masc.data_model import (
    Dataset,
    SchemaError,
    group_cardinalities,
    load_many,
    load_schema,
    output_schema,
    read_structured,
    write_csv,
)
from masc.discrepancy import DistanceMatrix, KernelSpec, pairwise_distance_matrix
from masc.evaluator import TrainingConfig, evaluate_method
from masc.fairness import dataset_report
from masc.io import atomic_write_text, dumps_json, write_csv_rows, write_json
from masc.pipeline import ClusteringResult, PipelineConfig, augment_in_cluster, cluster_from_distances, prepare

logger = logging.getLogger("masc")

METHODS = ("none", "masc", "geo", "smote", "rus")
METHOD_LABELS = {"none": "Initial", "masc": "MASC", "geo": "Geo-nei", "smote": "SMOTE", "rus": "RUS"}
DEFAULT_SEED = 42


class ConfigError(Exception):
    """Invalid configuration; maps to exit code 2."""


@dataclass
class RunConfig:
    schema: Path | None = None
    datasets: dict[str, Path] = field(default_factory=dict)
    kernel: str = "linear"
    kernel_gamma: float | None = None
    gamma: float = DEFAULT_GAMMA
    k: int | str = "auto"
    l_max: int | None = None
    normalize: bool = True
    scale: str = "joint"
    cluster_seed: int = DEFAULT_SEED
    augment_seed: int = DEFAULT_SEED
    split_seed: int = DEFAULT_SEED
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    targets: list[str] | None = None
    region_map: Path | None = None
    k_neighbors: int = 5
    out_dir: Path = Path("masc_out")

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            kernel=KernelSpec(self.kernel, self.kernel_gamma),
            gamma=self.gamma,
            normalize=self.normalize,
            k=self.k,
            l_max=self.l_max,
            scale=self.scale,
            cluster_seed=self.cluster_seed,
            augment_seed=self.augment_seed,
        )

    def validate(self) -> None:
        if self.schema is None:
            raise ConfigError("no schema given (--schema or 'schema' in the config file)")
        if not self.schema.is_file():
            raise ConfigError(f"schema file not found: {self.schema}")
        if len(self.datasets) < 1:
            raise ConfigError("no datasets given (--data or 'datasets' in the config file)")
        for ds_id, path in self.datasets.items():
            if not path.is_file():
                raise ConfigError(f"dataset {ds_id!r}: file not found: {path}")
        if self.region_map is not None and not self.region_map.is_file():
            raise ConfigError(f"region map not found: {self.region_map}")
        if self.kernel not in ("linear", "gaussian"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.kernel_gamma is not None and not self.kernel_gamma > 0:
            raise ConfigError("kernel gamma must be positive")
        if not self.gamma > 0:
            raise ConfigError("--gamma must be positive")
        if self.k != "auto" and (not isinstance(self.k, int) or self.k < 1):
            raise ConfigError(f"--k must be 'auto' or a positive integer, got {self.k!r}")
        if self.scale not in ("joint", "per_dataset", "none"):
            raise ConfigError(f"unknown scaling mode {self.scale!r}")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"unknown method(s) {unknown}; choose from {list(METHODS)}")
        if self.targets:
            missing = [t for t in self.targets if t not in self.datasets]
            if missing:
                raise ConfigError(f"unknown target id(s) {missing}")
        if self.k_neighbors < 1:
            raise ConfigError("--k-neighbors must be >= 1")


def _parse_k(value) -> int | str:
    if value is None:
        return "auto"
    if isinstance(value, int):
        return value
    value = str(value).strip().lower()
    if value == "auto":
        return "auto"
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"--k must be 'auto' or an integer, got {value!r}") from None


def _resolve_datasets(entries, base: Path) -> dict[str, Path]:
    """Dataset ids from a mapping {id: path} or a list of paths/globs (id = file stem)."""
    out: dict[str, Path] = {}

    def add(ds_id: str, path: Path):
        if ds_id in out:
            raise ConfigError(f"duplicate dataset id {ds_id!r}")
        out[ds_id] = path

    if isinstance(entries, dict):
        for ds_id, p in entries.items():
            add(str(ds_id), (base / str(p)) if not Path(str(p)).is_absolute() else Path(str(p)))
        return out
    if isinstance(entries, (str, Path)):
        entries = [entries]
    for entry in entries or []:
        if isinstance(entry, dict):
            p = Path(str(entry["path"]))
            add(str(entry.get("id") or p.stem), p if p.is_absolute() else base / p)
            continue
        pattern = str(entry) if Path(str(entry)).is_absolute() else str(base / str(entry))
        if glob.has_magic(pattern):
            matches = sorted(glob.glob(pattern))
            if not matches:
                raise ConfigError(f"pattern matched no files: {entry}")
            for m in matches:
                add(Path(m).stem, Path(m))
        else:
            add(Path(pattern).stem, Path(pattern))
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            raw = read_structured(path)
        except (SchemaError, ValueError) as exc:
            raise ConfigError(f"{path}: {exc}") from None
        base = path.parent
        if "schema" in raw:
            cfg.schema = base / str(raw["schema"])
        if "datasets" in raw:
            cfg.datasets = _resolve_datasets(raw["datasets"], base)
        kernel = raw.get("kernel")
        if isinstance(kernel, dict):
            cfg.kernel = str(kernel.get("kind", "linear"))
            cfg.kernel_gamma = kernel.get("gamma")
        elif kernel is not None:
            cfg.kernel = str(kernel)
        cfg.kernel_gamma = raw.get("kernel_gamma", cfg.kernel_gamma)
        cfg.gamma = float(raw.get("gamma", cfg.gamma))
        cfg.k = _parse_k(raw.get("k", "auto"))
        cfg.l_max = raw.get("l_max")
        cfg.normalize = bool(raw.get("normalize", True))
        cfg.scale = str(raw.get("scale", cfg.scale))
        seeds = raw.get("seeds", {}) or {}
        cfg.cluster_seed = int(seeds.get("cluster", DEFAULT_SEED))
        cfg.augment_seed = int(seeds.get("augment", DEFAULT_SEED))
        cfg.split_seed = int(seeds.get("split", DEFAULT_SEED))
        if "methods" in raw:
            cfg.methods = list(raw["methods"])
        if raw.get("targets"):
            cfg.targets = [str(t) for t in raw["targets"]]
        if raw.get("region_map"):
            cfg.region_map = base / str(raw["region_map"])
        cfg.k_neighbors = int(raw.get("k_neighbors", cfg.k_neighbors))
        if raw.get("out_dir"):
            cfg.out_dir = base / str(raw["out_dir"])

    if getattr(args, "schema", None):
        cfg.schema = Path(args.schema)
    if getattr(args, "data", None):
        cfg.datasets = _resolve_datasets(args.data, Path("."))
    for attr in ("kernel", "kernel_gamma", "gamma", "l_max", "scale", "k_neighbors"):
        value = getattr(args, attr, None)
        if value is not None:
            setattr(cfg, attr, value)
    if getattr(args, "k", None) is not None:
        cfg.k = _parse_k(args.k)
    if getattr(args, "no_normalize", False):
        cfg.normalize = False
    if getattr(args, "region_map", None):
        cfg.region_map = Path(args.region_map)
    if getattr(args, "out", None):
        cfg.out_dir = Path(args.out)
    if getattr(args, "methods", None):
        cfg.methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if getattr(args, "targets", None):
        cfg.targets = [t.strip() for t in args.targets.split(",") if t.strip()]
    if getattr(args, "split_seed", None) is not None:
        cfg.split_seed = args.split_seed
    seed = getattr(args, "seed", None)
    if seed is not None:
        if args.command == "cluster":
            cfg.cluster_seed = seed
        else:
            cfg.augment_seed = seed
    if getattr(args, "cluster_seed", None) is not None:
        cfg.cluster_seed = args.cluster_seed
    cfg.validate()
    return cfg


def load_datasets(cfg: RunConfig) -> list[Dataset]:
    try:
        schema = load_schema(cfg.schema)
    except (SchemaError, KeyError, TypeError) as exc:
        raise ConfigError(f"invalid schema {cfg.schema}: {exc}") from None
    return load_many(cfg.datasets, schema)


# -- clustering with a content-addressed cache ---------------------------------


def _digest(*parts) -> str:
    h = hashlib.sha256()
    for part in parts:
        h.update(part if isinstance(part, bytes) else json.dumps(part, sort_keys=True, default=str).encode())
    return h.hexdigest()[:16]


def _cache_dir(cfg: RunConfig) -> Path:
    return cfg.out_dir / ".masc_cache"


def compute_clustering(datasets: list[Dataset], cfg: RunConfig) -> ClusteringResult:
    pcfg = cfg.pipeline()
    input_key = _digest(
        *[ds.id.encode() + ds.features.tobytes() for ds in datasets],
        [cfg.kernel, cfg.kernel_gamma, cfg.normalize, cfg.scale],
    )
    dist_file = _cache_dir(cfg) / f"distances-{input_key}.json"
    if dist_file.is_file():
        w = DistanceMatrix.from_dict(json.loads(dist_file.read_text()))
        logger.info("reusing cached distances %s", dist_file.name)
    else:
        w = pairwise_distance_matrix(prepare(datasets, cfg.scale), pcfg.kernel, pcfg.normalize, pcfg.threads)
        atomic_write_text(dist_file, json.dumps(w.to_dict()))

    clustering = cluster_from_distances(w, pcfg)
    assign_key = _digest(w.values.tobytes(), list(w.dataset_ids), [cfg.gamma, str(cfg.k), cfg.l_max, cfg.cluster_seed])
    assign_file = _cache_dir(cfg) / f"assignment-{assign_key}.json"
    if assign_file.is_file():
        cached = json.loads(assign_file.read_text())
        if cached["labels"] != clustering.assignment.labels.tolist():
            logger.warning("cached assignment differs from recomputation; using the recomputed one")
    else:
        atomic_write_text(assign_file, json.dumps({"k": clustering.k, "labels": clustering.assignment.labels.tolist()}))
    return clustering


def _matrix_out(path: Path, obj) -> None:
    if path.suffix.lower() == ".json":
        write_json(path, obj.to_dict())
    else:
        atomic_write_text(path, obj.to_csv())


def _eigen_rows(c: ClusteringResult) -> list[list]:
    vals = c.decomposition.eigenvalues
    gaps = c.assignment.eigengap_vector
    return [[i + 1, float(v), float(gaps[i]) if i < len(gaps) else float("nan")] for i, v in enumerate(vals)]


def _eigen_out(path: Path, c: ClusteringResult) -> None:
    if path.suffix.lower() == ".json":
        write_json(path, {"eigenvalues": c.decomposition.eigenvalues, "eigengap_vector": c.assignment.eigengap_vector})
    else:
        write_csv_rows(path, ["index", "eigenvalue", "gap_to_next"], _eigen_rows(c))


def write_clustering(out: Path, c: ClusteringResult, cfg: RunConfig) -> None:
    out.mkdir(parents=True, exist_ok=True)
    _matrix_out(out / "distances.csv", c.distances)
    _matrix_out(out / "affinity.csv", c.affinity)
    write_csv_rows(out / "eigenvalues.csv", ["index", "eigenvalue", "gap_to_next"], _eigen_rows(c))
    write_json(out / "assignment.json", c.assignment.as_mapping())
    write_json(
        out / "clustering.json",
        {
            "k": c.k,
            "k_mode": str(cfg.k),
            "gamma": cfg.gamma,
            "kernel": cfg.kernel,
            "normalize": cfg.normalize,
            "scale": cfg.scale,
            "seed": cfg.cluster_seed,
            "eigenvalues": c.decomposition.eigenvalues,
            "eigengap_vector": c.assignment.eigengap_vector,
            "assignment": c.assignment.as_mapping(),
        },
    )


# -- subcommands ----------------------------------------------------------------


def cmd_cluster(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    datasets = load_datasets(cfg)
    c = compute_clustering(datasets, cfg)
    write_clustering(cfg.out_dir, c, cfg)
    if args.emit_distances:
        _matrix_out(Path(args.emit_distances), c.distances)
    if args.emit_eigenvalues:
        _eigen_out(Path(args.emit_eigenvalues), c)
    sys.stdout.write(dumps_json(c.assignment.as_mapping()))
    return 0


def _apply_method(
    method: str,
    target: Dataset,
    datasets: list[Dataset],
    cfg: RunConfig,
    clustering: ClusteringResult | None,
    regions: RegionMap | None,
) -> tuple[Dataset, dict]:
    """Augment ``target`` (a full dataset or its training split) with one strategy."""
    if method == "none":
        return target, {}
    if method == "masc":
        res: AugmentationResult = augment_in_cluster(datasets, target, clustering.assignment, cfg.augment_seed)
        prov = res.provenance()
        prov["cluster"] = clustering.assignment.cluster_of(target.id)
        return res.augmented, prov
    if method == "smote":
        out, p = group_smote(target, cfg.k_neighbors, cfg.augment_seed, return_provenance=True)
        return out, {
            "synthetic": [
                {"base_row": int(b), "neighbor_row": int(nb), "u": float(u)} for b, nb, u in zip(p.base, p.neighbor, p.u)
            ]
        }
    if method == "rus":
        out = group_rus(target, cfg.augment_seed)
        return out, {"kept_rows": out.source_rows.tolist()}
    if method == "geo":
        others = [ds for ds in datasets if ds.id != target.id]
        out = geo_concat([target, *others], regions, target.id)
        region = regions.region_of[target.id]
        return out, {"region": region, "members": regions.members(region, [ds.id for ds in datasets])}
    raise ConfigError(f"unknown method {method!r}")


def _needs(cfg: RunConfig, methods: Sequence[str]) -> tuple[bool, RegionMap | None]:
    regions = None
    if "geo" in methods:
        if cfg.region_map is None:
            raise ConfigError("method 'geo' needs a region map (--region-map or 'region_map')")
        regions = RegionMap.load(cfg.region_map)
        missing = [i for i in cfg.datasets if i not in regions.region_of]
        if missing:
            raise ConfigError(f"region map has no region for {missing}")
    return "masc" in methods, regions


def cmd_augment(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    method = args.method
    if args.target and args.all:
        raise ConfigError("use either --target or --all")
    targets = list(cfg.datasets) if args.all or not args.target else args.target
    unknown = [t for t in targets if t not in cfg.datasets]
    if unknown:
        raise ConfigError(f"unknown target id(s) {unknown}")
    need_clusters, regions = _needs(cfg, [method])
    datasets = load_datasets(cfg)
    by_id = {ds.id: ds for ds in datasets}
    clustering = compute_clustering(datasets, cfg) if need_clusters else None
    if clustering is not None:
        write_clustering(cfg.out_dir / "clustering", clustering, cfg)

    out = cfg.out_dir
    write_json(out / "schema.json", output_schema(datasets[0].schema).to_dict())
    for t in targets:
        augmented, prov = _apply_method(method, by_id[t], datasets, cfg, clustering, regions)
        write_csv(augmented, out / f"{t}.csv")
        prov = {"method": METHOD_LABELS[method], "target": t, "seed": cfg.augment_seed,
                "n_before": by_id[t].n, "n_after": augmented.n,
                "per_group_after": group_cardinalities(augmented).tolist(), **prov}
        write_json(out / f"{t}.provenance.json", prov)
        logger.info("%s: %d -> %d rows", t, by_id[t].n, augmented.n)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    methods = list(dict.fromkeys(cfg.methods))
    need_clusters, regions = _needs(cfg, methods)
    datasets = load_datasets(cfg)
    by_id = {ds.id: ds for ds in datasets}
    targets = cfg.targets or list(by_id)
    clustering = compute_clustering(datasets, cfg) if need_clusters else None
    if clustering is not None:
        write_clustering(cfg.out_dir / "clustering", clustering, cfg)
    train_cfg = TrainingConfig(seed=cfg.split_seed)
    schema = datasets[0].schema
    groups = schema.protected_groups

    table_rows, model_rows, records = [], [], []
    for t in targets:
        original = by_id[t]
        majority = int(np.argmax(group_cardinalities(original)))
        minorities = [g for g in range(schema.n_groups) if g != majority]
        for m in methods:
            label = METHOD_LABELS[m]
            full, _ = _apply_method(m, original, datasets, cfg, clustering, regions)
            drep = dataset_report(full, label, majority)
            table_rows.append(
                [t, label, full.n, *[float(v) for v in drep.gr],
                 *[drep.sp[g] for g in minorities], *[drep.di[g] for g in minorities]]
            )
            augmenter = None if m == "none" else (
                lambda train, m=m: _apply_method(m, train, datasets, cfg, clustering, regions)[0]
            )
            mrep = evaluate_method(original, augmenter, cfg.split_seed, label, train_cfg, majority)
            for g in minorities:
                model_rows.append(
                    [t, label, groups[g], mrep.accuracy, mrep.eq_odds[g], mrep.sp[g], mrep.di[g],
                     mrep.extra["n_train"], mrep.extra["n_test"]]
                )
            records.append({
                "dataset_id": t,
                "method": label,
                "majority": groups[majority],
                "data": {"n": full.n, "gr": dict(zip(groups, drep.gr)),
                         "sp": {groups[g]: drep.sp[g] for g in minorities},
                         "di": {groups[g]: drep.di[g] for g in minorities}},
                "model": {"accuracy": mrep.accuracy,
                          "eq_odds": {groups[g]: mrep.eq_odds[g] for g in minorities},
                          "sp": {groups[g]: mrep.sp[g] for g in minorities},
                          "di": {groups[g]: mrep.di[g] for g in minorities},
                          "n_train": mrep.extra["n_train"], "n_test": mrep.extra["n_test"],
                          "converged": mrep.extra["converged"]},
            })

    out = cfg.out_dir
    # minority columns are positional (Min1, Min2, ...) because the majority may differ per dataset
    n_min = schema.n_groups - 1
    header = ["dataset_id", "method", "n", *[f"GR_{g}" for g in groups],
              *[f"SP_Min{i + 1}" for i in range(n_min)], *[f"DI_Min{i + 1}" for i in range(n_min)]]
    if _fixed_majority(by_id, targets):
        maj = groups[int(np.argmax(group_cardinalities(by_id[targets[0]])))]
        mins = [g for g in groups if g != maj]
        header = ["dataset_id", "method", "n", *[f"GR_{g}" for g in groups],
                  *[f"SP_{g}" for g in mins], *[f"DI_{g}" for g in mins]]
    write_csv_rows(out / "dataset_metrics.csv", header, table_rows)
    write_csv_rows(
        out / "model_metrics.csv",
        ["dataset_id", "method", "minority", "accuracy", "eq_odds", "pred_sp", "pred_di", "n_train", "n_test"],
        model_rows,
    )
    write_json(
        out / "reports.json",
        {
            "protocol": {
                "split": "70/30 stratified by (group, target); methods applied to the training split; "
                "test rows are untouched original rows",
                "split_seed": cfg.split_seed,
                "augment_seed": cfg.augment_seed,
                "training": {"learning_rate": train_cfg.learning_rate, "max_epochs": train_cfg.max_epochs,
                             "tolerance": train_cfg.tolerance, "regularization": None},
                "protected_attribute_in_features": False,
            },
            "reports": records,
        },
    )
    return 0


def _fixed_majority(by_id: dict[str, Dataset], targets: list[str]) -> bool:
    majors = {int(np.argmax(group_cardinalities(by_id[t]))) for t in targets}
    return len(majors) == 1


def cmd_report(args: argparse.Namespace) -> int:
    if not args.make_benchmark and not args.results:
        raise ConfigError("report needs --make-benchmark SPEC or --results DIR")
    out = Path(args.out)
    if args.make_benchmark:
        spec_path = Path(args.make_benchmark)
        if not spec_path.is_file():
            raise ConfigError(f"benchmark spec not found: {spec_path}")
        try:
            spec = BenchmarkSpec.load(spec_path)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid benchmark spec {spec_path}: {exc}") from None
        write_benchmark(spec, out)
    if args.results:
        summarize_results(Path(args.results), out)
    return 0


def write_benchmark(spec: BenchmarkSpec, out: Path) -> None:
    bench = generate(spec)
    data_dir = out / "data"
    for ds in bench.datasets:
        write_csv(ds, data_dir / f"{ds.id}.csv")
    schema = bench.datasets[0].schema
    write_json(out / "schema.json", schema.to_dict())
    write_json(out / "families.json", {ds.id: f for ds, f in zip(bench.datasets, bench.families)})
    write_json(out / "region_map.json", bench.region_map())
    write_json(
        out / "run.json",
        {
            "schema": "schema.json",
            "datasets": ["data/*.csv"],
            "region_map": "region_map.json",
            "kernel": "linear",
            "gamma": DEFAULT_GAMMA,
            "k": "auto",
            "seeds": {"cluster": DEFAULT_SEED, "augment": DEFAULT_SEED, "split": DEFAULT_SEED},
            "methods": list(METHODS),
            "out_dir": "results",
        },
    )


def summarize_results(results: Path, out: Path) -> None:
    """Plot-ready CSVs from an ``evaluate`` output directory."""
    reports_file = results / "reports.json"
    if not reports_file.is_file():
        raise ConfigError(f"no reports.json in {results}")
    reports = json.loads(reports_file.read_text())["reports"]
    gr_rows, model_rows = [], []
    for rec in reports:
        for group, ratio in rec["data"]["gr"].items():
            gr_rows.append([rec["dataset_id"], rec["method"], group, float(ratio)])
        for group, eo in rec["model"]["eq_odds"].items():
            model_rows.append([rec["dataset_id"], rec["method"], group, float(rec["model"]["accuracy"]),
                               float("nan") if eo is None else float(eo)])
    write_csv_rows(out / "group_ratios.csv", ["dataset_id", "method", "group", "gr"], gr_rows)
    write_csv_rows(out / "model_performance.csv", ["dataset_id", "method", "minority", "accuracy", "eq_odds"], model_rows)
    clustering = results / "clustering" / "clustering.json"
    if clustering.is_file():
        info = json.loads(clustering.read_text())
        vals = info["eigenvalues"][:10]
        write_csv_rows(out / "eigenvalues.csv", ["index", "eigenvalue"], [[i + 1, float(v)] for i, v in enumerate(vals)])


# -- argument parsing -----------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="run config file (YAML or JSON)")
    p.add_argument("--schema", help="schema file (YAML or JSON)")
    p.add_argument("--data", action="append", help="dataset CSV path or glob; repeatable; id = file stem")
    p.add_argument("--kernel", choices=["linear", "gaussian"], help="MMD kernel (default linear)")
    p.add_argument("--kernel-gamma", type=float, help="gaussian MMD kernel bandwidth (default: median heuristic)")
    p.add_argument("--gamma", type=float, help=f"affinity bandwidth (default {DEFAULT_GAMMA})")
    p.add_argument("--k", help="number of clusters or 'auto' for the eigengap (default auto)")
    p.add_argument("--l-max", type=int, help="eigenvalues considered for the eigengap (default min(r, 10))")
    p.add_argument("--scale", choices=["joint", "per_dataset", "none"], help="feature scaling before MMD")
    p.add_argument("--no-normalize", action="store_true", help="skip min-max normalisation of distances")
    p.add_argument("--region-map", help="region map file for the geo baseline")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="pairwise MMD, affinity and spectral clustering")
    _common(p)
    p.add_argument("--seed", type=int, help="k-means seed")
    p.add_argument("--emit-distances", help="also write the distance matrix here (.csv or .json)")
    p.add_argument("--emit-eigenvalues", help="also write eigenvalues and gaps here (.csv or .json)")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("augment", help="augment target datasets")
    _common(p)
    p.add_argument("--target", action="append", help="target dataset id; repeatable")
    p.add_argument("--all", action="store_true", help="augment every dataset")
    p.add_argument("--method", choices=["masc", "smote", "rus", "geo"], default="masc")
    p.add_argument("--seed", type=int, help="augmentation seed")
    p.add_argument("--cluster-seed", type=int, help="k-means seed")
    p.add_argument("--k-neighbors", type=int, help="SMOTE neighbours (default 5)")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("evaluate", help="fairness metrics and LR comparison per method")
    _common(p)
    p.add_argument("--methods", help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--targets", help="comma list of dataset ids (default all)")
    p.add_argument("--split-seed", type=int)
    p.add_argument("--seed", type=int, help="augmentation seed")
    p.add_argument("--cluster-seed", type=int, help="k-means seed")
    p.add_argument("--k-neighbors", type=int, help="SMOTE neighbours (default 5)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="synthetic benchmark generation and plot-ready summaries")
    p.add_argument("--make-benchmark", metavar="SPEC", help="benchmark spec file (YAML or JSON)")
    p.add_argument("--results", metavar="DIR", help="an evaluate output directory to summarise")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"masc: error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, FileNotFoundError) as exc:
        print(f"masc: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        logger.debug("runtime failure", exc_info=True)
        print(f"masc: runtime error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
