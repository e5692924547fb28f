"""Per-group prediction distributions, accuracies and targeted-group flags."""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd

from src.classifier.model import ClassifierModel, accuracy_from_scores, predict_proba
from src.dataset import DatasetTable, GroupPredicate, enumerate_groups
from src.exceptions import ParameterError

logger = logging.getLogger(__name__)

DEFAULT_BINS = 10
DEFAULT_GAP_THRESHOLD = 0.1
Z_95 = 1.96
FLAG_RULE = (
    "flag a group when its mean predicted positive probability or its accuracy "
    "trails the best group of the same attribute by more than gap_threshold"
)


@dataclass(frozen=True)
class GroupHistogram:
    group: GroupPredicate
    bin_edges: np.ndarray
    counts: np.ndarray

    @property
    def normalized(self) -> np.ndarray:
        total = self.counts.sum()
        if total == 0:
            return np.zeros(len(self.counts))
        return self.counts / total

    def to_dict(self) -> dict[str, Any]:
        return {
            "bin_edges": self.bin_edges.tolist(),
            "counts": [int(c) for c in self.counts],
            "normalized": self.normalized.tolist(),
        }


@dataclass(frozen=True)
class GroupSummary:
    """Scores of one group under one classifier."""

    group: GroupPredicate
    size: int
    mean_probability: float
    accuracy: float
    histogram: GroupHistogram

    @property
    def accuracy_half_width(self) -> float:
        # binomial normal approximation
        a = self.accuracy
        return Z_95 * math.sqrt(a * (1 - a) / self.size)

    def to_dict(self) -> dict[str, Any]:
        return {
            "group": self.group.as_dict(),
            "size": self.size,
            "mean_probability": self.mean_probability,
            "accuracy": self.accuracy,
            "accuracy_half_width": self.accuracy_half_width,
            "histogram": self.histogram.to_dict(),
        }


@dataclass(frozen=True)
class TpgFlag:
    group: GroupPredicate
    statistic: str
    gap: float
    reference: GroupPredicate

    def to_dict(self) -> dict[str, Any]:
        return {
            "group": str(self.group),
            "statistic": self.statistic,
            "gap": self.gap,
            "reference": str(self.reference),
        }


@dataclass(frozen=True)
class BiasReport:
    summaries: dict[str, GroupSummary]
    flags: tuple[TpgFlag, ...]
    gap_threshold: float
    bins: int

    @property
    def flagged(self) -> list[GroupPredicate]:
        return [flag.group for flag in self.flags]

    def to_dict(self) -> dict[str, Any]:
        return {
            "bins": self.bins,
            "gap_threshold": self.gap_threshold,
            "flag_rule": FLAG_RULE,
            "groups": {name: s.to_dict() for name, s in self.summaries.items()},
            "flags": [flag.to_dict() for flag in self.flags],
        }


def histogram_from_scores(
    group: GroupPredicate, scores: np.ndarray, bins: int = DEFAULT_BINS
) -> GroupHistogram:
    """Uniform bins on [0,1]; the last bin is closed so a score of 1.0 counts."""
    if bins < 1:
        raise ParameterError(f"bins must be >= 1, got {bins}")
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(np.clip(scores, 0.0, 1.0), bins=edges)
    return GroupHistogram(group, edges, counts.astype(np.int64))


def _group_scores(
    clf: ClassifierModel, table: DatasetTable, group: GroupPredicate
) -> tuple[np.ndarray, np.ndarray]:
    mask = table.group_mask(group)
    if not mask.any():
        raise ParameterError(f"group {group} matches no rows")
    return predict_proba(clf, table.take(np.flatnonzero(mask))), table.label_indicator()[mask]


def prediction_distribution(
    clf: ClassifierModel, table: DatasetTable, group: GroupPredicate, bins: int = DEFAULT_BINS
) -> GroupHistogram:
    scores, _ = _group_scores(clf, table, group)
    return histogram_from_scores(group, scores, bins)


def group_accuracy(clf: ClassifierModel, table: DatasetTable, group: GroupPredicate) -> float:
    scores, labels = _group_scores(clf, table, group)
    return accuracy_from_scores(scores, labels)


def summarize_scores(
    group: GroupPredicate, scores: np.ndarray, labels: np.ndarray, bins: int = DEFAULT_BINS
) -> GroupSummary:
    if len(scores) == 0:
        raise ParameterError(f"group {group} matches no rows")
    return GroupSummary(
        group=group,
        size=len(scores),
        mean_probability=float(np.mean(scores)),
        accuracy=accuracy_from_scores(scores, labels),
        histogram=histogram_from_scores(group, scores, bins),
    )


def flag_tpgs(summaries: Sequence[GroupSummary], gap_threshold: float) -> list[TpgFlag]:
    """Flag groups trailing their attribute's best group by more than the threshold.

    Groups sharing the same constrained columns form one attribute. Output is
    sorted by attribute and group text so enumeration order does not matter.
    """
    if not gap_threshold >= 0:
        raise ParameterError(f"gap_threshold must be >= 0, got {gap_threshold}")

    attributes: dict[tuple[str, ...], list[GroupSummary]] = {}
    for summary in summaries:
        attributes.setdefault(summary.group.columns, []).append(summary)

    flags = []
    for columns, members in sorted(attributes.items()):
        if len(members) < 2:
            logger.warning(f"Attribute {','.join(columns) or '*'} has a single group, skipping")
            continue
        best_mean = max(members, key=lambda s: (s.mean_probability, str(s.group)))
        best_accuracy = max(members, key=lambda s: (s.accuracy, str(s.group)))
        for member in sorted(members, key=lambda s: str(s.group)):
            mean_gap = best_mean.mean_probability - member.mean_probability
            accuracy_gap = best_accuracy.accuracy - member.accuracy
            if mean_gap > gap_threshold:
                flags.append(TpgFlag(member.group, "mean_probability", mean_gap, best_mean.group))
            elif accuracy_gap > gap_threshold:
                flags.append(TpgFlag(member.group, "accuracy", accuracy_gap, best_accuracy.group))

    for flag in flags:
        logger.info(f"Flagged {flag.group}: {flag.statistic} gap {flag.gap:.4f}")
    return flags


def analyze(
    clf: ClassifierModel,
    table: DatasetTable,
    groups: Sequence[GroupPredicate] | None = None,
    gap_threshold: float = DEFAULT_GAP_THRESHOLD,
    bins: int = DEFAULT_BINS,
) -> BiasReport:
    """Score every group and flag targeted groups.

    Without explicit groups, every single-attribute group of the schema is
    analyzed and groups absent from the table are skipped with a warning.
    """
    explicit = groups is not None
    candidates = (
        list(dict.fromkeys(groups)) if groups is not None else enumerate_groups(table.schema)
    )
    scores = predict_proba(clf, table)
    labels = table.label_indicator()

    summaries: dict[str, GroupSummary] = {}
    for group in candidates:
        mask = table.group_mask(group)
        if not mask.any():
            if explicit:
                raise ParameterError(f"group {group} matches no rows")
            logger.warning(f"Group {group} has no rows, skipping")
            continue
        summaries[str(group)] = summarize_scores(group, scores[mask], labels[mask], bins)

    flags = flag_tpgs(list(summaries.values()), gap_threshold)
    return BiasReport(summaries, tuple(flags), gap_threshold, bins)


def histogram_frame(report: BiasReport) -> pd.DataFrame:
    records = []
    for name, summary in report.summaries.items():
        hist = summary.histogram
        for i, (count, share) in enumerate(zip(hist.counts, hist.normalized, strict=True)):
            records.append(
                {
                    "group": name,
                    "bin_lo": float(hist.bin_edges[i]),
                    "bin_hi": float(hist.bin_edges[i + 1]),
                    "count": int(count),
                    "normalized": float(share),
                }
            )
    return pd.DataFrame.from_records(
        records, columns=["group", "bin_lo", "bin_hi", "count", "normalized"]
    )


def histogram_csv_text(report: BiasReport, digits: int = 10) -> str:
    frame = histogram_frame(report)
    for column in ("bin_lo", "bin_hi", "normalized"):
        frame[column] = frame[column].round(digits)
    return frame.to_csv(index=False, lineterminator="\n")
