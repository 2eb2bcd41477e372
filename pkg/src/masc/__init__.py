"""Minority augmentation of tabular datasets through MMD-based spectral clustering."""

from masc.affinity import AffinityMatrix, to_affinity
from masc.augmentation import AugmentationResult, ClusterPool, augment, build_pool
from masc.baselines import RegionMap, geo_concat, group_rus, group_smote
from masc.benchmark import BenchmarkSpec, generate
from masc.data_model import (
    Dataset,
    Schema,
    group_cardinalities,
    joint_scale,
    load_csv,
    load_schema,
    standard_scale,
)
from masc.discrepancy import DistanceMatrix, KernelSpec, mmd, pairwise_distance_matrix
from masc.evaluator import TrainingConfig, evaluate_method, train_lr
from masc.fairness import (
    FairnessReport,
    accuracy,
    disparate_impact,
    equalized_odds,
    group_ratio,
    statistical_parity,
)
from masc.pipeline import ClusteringResult, PipelineConfig, cluster_datasets, run_pipeline
from masc.spectral import (
    ClusterAssignment,
    LaplacianDecomposition,
    decompose,
    embed_and_cluster,
    laplacian,
    select_k,
)

__version__ = "0.1.0"
