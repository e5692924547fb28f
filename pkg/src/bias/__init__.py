"""Bias analysis: per-group distributions, accuracies and TPG flags."""

from src.bias.analysis import (
    DEFAULT_BINS,
    DEFAULT_GAP_THRESHOLD,
    BiasReport,
    GroupHistogram,
    GroupSummary,
    TpgFlag,
    analyze,
    flag_tpgs,
    group_accuracy,
    histogram_csv_text,
    histogram_from_scores,
    prediction_distribution,
    summarize_scores,
)

__all__ = [
    "DEFAULT_BINS",
    "DEFAULT_GAP_THRESHOLD",
    "BiasReport",
    "GroupHistogram",
    "GroupSummary",
    "TpgFlag",
    "analyze",
    "flag_tpgs",
    "group_accuracy",
    "histogram_csv_text",
    "histogram_from_scores",
    "prediction_distribution",
    "summarize_scores",
]
