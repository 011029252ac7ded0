"""Topological classification of mixed numeric/categorical tabular data.

Each record becomes a small point cloud (the record plus its
coordinate-zeroing projections), clouds become dimension-0 persistence
diagrams, diagrams are compared with the p-Wasserstein distance, and a
k-nearest-neighbor vote classifies. See README.md for the CLI and config
formats.
"""

__version__ = "0.1.0"

from .classify import knn_predict
from .cloud import PointCloud, build_point_cloud, pairwise_distances, project
from .errors import (
    ContractError,
    EvaluationError,
    FitError,
    ParseError,
    SchemaError,
    TopmixError,
)
from .evaluate import (
    ConfusionCounts,
    EvaluationReport,
    SplitResult,
    SplitSpec,
    compute_metrics,
    evaluate_kfold,
    evaluate_split,
    holdout_indices,
    kfold_indices,
    select_k_kfold,
)
from .ingest import ParseReport, RawDataset, binarize_target, parse_dataset
from .metric import bottleneck, distance_matrix, wasserstein
from .persistence import (
    PersistenceDiagram,
    choose_maxscale,
    diagrams_for_rows,
    rips_dim0_diagram,
)
from .pipeline import (
    ExperimentConfig,
    load_experiment_config,
    run_pipeline,
)
from .preprocess import (
    FeatureMatrix,
    StandardizationParams,
    default_symmetry_vector,
    fit_standardizer,
    one_hot_encode,
    standardize,
    symmetry_break,
)
from .schema import Attribute, PositiveRule, SchemaSpec, cleveland_schema, load_schema, save_schema
