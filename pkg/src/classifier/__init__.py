"""Downstream classifier and its evaluation protocol."""

from src.classifier.evaluation import (
    HIDDEN_UNIT_SWEEP,
    EvalResult,
    Interval,
    ci_half_width,
    comparison_csv_text,
    comparison_table,
    evaluate_ci,
    sweep_hidden_units,
)
from src.classifier.model import (
    ClassifierConfig,
    ClassifierModel,
    accuracy,
    accuracy_from_scores,
    load_classifier,
    predict_proba,
    save_classifier,
    train_classifier,
)

__all__ = [
    "HIDDEN_UNIT_SWEEP",
    "ClassifierConfig",
    "ClassifierModel",
    "EvalResult",
    "Interval",
    "accuracy",
    "accuracy_from_scores",
    "ci_half_width",
    "comparison_csv_text",
    "comparison_table",
    "evaluate_ci",
    "load_classifier",
    "predict_proba",
    "save_classifier",
    "sweep_hidden_units",
    "train_classifier",
]
