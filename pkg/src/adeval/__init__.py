"""Evaluation harness for unsupervised anomaly detection.

Two train/test protocols, F1/AUC/AVPR metrics with exact tie handling, and
closed-form models of how F1 and AVPR move with test-set contamination.
"""
from ._kernels import BACKEND
from .data import (
    DataError,
    Dataset,
    Normalizer,
    Sample,
    SplitPair,
    apply_normalizer,
    clean_subset,
    contamination_rate,
    fit_normalizer,
    generate_gaussian_circle,
    load_csv,
    parse_generator_spec,
    split_train_test,
)
from .detectors import DetectorSpec, ScoredSet, ScoreModel, fit_gaussian_scorer, fit_knn_scorer, score_all
from .metrics import (
    ConfusionCounts,
    Curve,
    MetricError,
    Threshold,
    auc,
    avpr,
    binary_metrics,
    confusion_at,
    optimal_f1_threshold,
    pr_curve,
    roc_curve,
    threshold_from_rate,
)
from .protocols import (
    EvalResult,
    ProtocolConfig,
    ProtocolFailure,
    run_estimate_sweep,
    run_injection_sweep,
    run_recycling,
    run_unbiased,
)

__all__ = [
    "BACKEND",
    "DataError",
    "Dataset",
    "Normalizer",
    "Sample",
    "SplitPair",
    "apply_normalizer",
    "clean_subset",
    "contamination_rate",
    "fit_normalizer",
    "generate_gaussian_circle",
    "load_csv",
    "parse_generator_spec",
    "split_train_test",
    "DetectorSpec",
    "ScoredSet",
    "ScoreModel",
    "fit_gaussian_scorer",
    "fit_knn_scorer",
    "score_all",
    "ConfusionCounts",
    "Curve",
    "MetricError",
    "Threshold",
    "auc",
    "avpr",
    "binary_metrics",
    "confusion_at",
    "optimal_f1_threshold",
    "pr_curve",
    "roc_curve",
    "threshold_from_rate",
    "EvalResult",
    "ProtocolConfig",
    "ProtocolFailure",
    "run_estimate_sweep",
    "run_injection_sweep",
    "run_recycling",
    "run_unbiased",
]

__version__ = "0.1.0"
