"""Feature-space outlier detection.

Cluster-conditional Gaussian modeling with min-Mahalanobis scoring,
KDE and max-cosine baselines, image preprocessing (resampling kernels,
gradient-sign perturbation), and AUROC-based OOD / one-vs-all evaluation,
all over a small binary feature interchange format (FVEC).
"""

from .config import PRESETS, RunConfig
from .detectors import fit_detector, load_detector, save_detector
from .evaluation import (
    OneVsAllReport,
    ScoreReport,
    auroc,
    confusion_matrix_eval,
    one_vs_all_eval,
    run_ood_eval,
)
from .fvec import FvecError, read_features, write_features
from .kmeans import ClusterModel, assign, kmeans_fit
from .mahalanobis import (
    MahalanobisModel,
    fit_gaussian_stats,
    gaussian_stats,
    mahalanobis_score,
    score_batch,
)
from .manifest import DatasetManifest, load_dataset, load_manifest
from .nonparametric import (
    CosineIndex,
    KdeModel,
    build_cosine_index,
    cosine_knn_score,
    fit_kde,
    kde_bandwidth_grid,
    kde_score,
)
from .preprocess import (
    PipelineConfig,
    center_crop,
    normalize_u8,
    perturb_input,
    preprocess_pipeline,
    resample,
)

__version__ = "0.1.0"

__all__ = [
    "ClusterModel",
    "CosineIndex",
    "DatasetManifest",
    "FvecError",
    "KdeModel",
    "MahalanobisModel",
    "OneVsAllReport",
    "PipelineConfig",
    "PRESETS",
    "RunConfig",
    "ScoreReport",
    "assign",
    "auroc",
    "build_cosine_index",
    "center_crop",
    "confusion_matrix_eval",
    "cosine_knn_score",
    "fit_detector",
    "fit_gaussian_stats",
    "fit_kde",
    "gaussian_stats",
    "kde_bandwidth_grid",
    "kde_score",
    "kmeans_fit",
    "load_dataset",
    "load_detector",
    "load_manifest",
    "mahalanobis_score",
    "normalize_u8",
    "one_vs_all_eval",
    "perturb_input",
    "preprocess_pipeline",
    "read_features",
    "resample",
    "run_ood_eval",
    "save_detector",
    "score_batch",
    "write_features",
]
