"""Tests for per-group distributions, accuracies and targeted-group flags."""

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.bias import (
    analyze,
    flag_tpgs,
    group_accuracy,
    histogram_csv_text,
    histogram_from_scores,
    prediction_distribution,
    summarize_scores,
)
from src.bias.plots import render_svg
from src.classifier import (
    ClassifierConfig,
    ClassifierModel,
    accuracy_from_scores,
    train_classifier,
)
from src.dataset import GroupPredicate
from src.exceptions import ParameterError


@pytest.fixture
def constant_clf(gap_table):
    """Classifier whose output is 0.5 for every row."""
    clf = train_classifier(gap_table, ClassifierConfig(hidden_units=4, epochs=0))
    zero = clf.model.with_parameters([np.zeros_like(p) for p in clf.model.parameters()])
    return ClassifierModel(zero, clf.encoder, clf.config)


@pytest.fixture
def trained_clf(gap_table, small_clf_config):
    return train_classifier(gap_table, small_clf_config)


def groups(schema):
    return GroupPredicate.of(schema, group="A"), GroupPredicate.of(schema, group="B")


class TestPredictionDistribution:
    def test_constant_classifier_fills_one_bin(self, constant_clf, gap_table, gap_schema):
        group_a, _ = groups(gap_schema)
        hist = prediction_distribution(constant_clf, gap_table, group_a)
        expected = np.zeros(10, dtype=np.int64)
        expected[5] = gap_table.group_count(group_a)
        assert_array_equal(hist.counts, expected)

    def test_counts_conserve_group_size(self, trained_clf, gap_table, gap_schema):
        for group in groups(gap_schema):
            hist = prediction_distribution(trained_clf, gap_table, group)
            assert hist.counts.sum() == gap_table.group_count(group)
            assert abs(hist.normalized.sum() - 1.0) < 1e-9
            assert len(hist.bin_edges) == 11

    def test_hand_counted_fixture(self, gap_schema):
        scores = np.array(
            [0.05] * 3 + [0.15] * 5 + [0.0] + [0.55] * 4 + [0.95] * 2 + [1.0] + [0.45] * 4
        )
        hist = histogram_from_scores(GroupPredicate(), scores)
        assert hist.counts.tolist() == [4, 5, 0, 0, 4, 4, 0, 0, 0, 3]

    def test_empty_group_names_predicate(self, trained_clf, gap_table, gap_schema):
        group_a, group_b = groups(gap_schema)
        with pytest.raises(ParameterError, match="group=B"):
            prediction_distribution(trained_clf, gap_table.where(group_a), group_b)


class TestGroupAccuracy:
    labels = np.array([1, 0, 1, 1, 0, 0, 1, 0, 1, 1], dtype=float)

    def test_oracle(self):
        assert accuracy_from_scores(self.labels, self.labels) == 1.0

    def test_inverted(self):
        assert accuracy_from_scores(1.0 - self.labels, self.labels) == 0.0

    def test_three_wrong_of_ten(self):
        scores = self.labels.copy()
        scores[[0, 4, 7]] = 1.0 - scores[[0, 4, 7]]
        assert accuracy_from_scores(scores, self.labels) == pytest.approx(0.7)

    def test_threshold_is_inclusive(self):
        assert accuracy_from_scores(np.array([0.5]), np.array([1.0])) == 1.0

    def test_on_classifier(self, trained_clf, gap_table, gap_schema):
        group_a, group_b = groups(gap_schema)
        assert 0.0 <= group_accuracy(trained_clf, gap_table, group_a) <= 1.0
        with pytest.raises(ParameterError):
            group_accuracy(trained_clf, gap_table.where(group_a), group_b)


def summary(group, mean, labels=None):
    scores = np.full(10, mean)
    if labels is None:
        labels = (scores >= 0.5).astype(float)
    return summarize_scores(group, scores, labels)


class TestFlagTpgs:
    def test_identical_groups_not_flagged(self, gap_schema):
        group_a, group_b = groups(gap_schema)
        assert flag_tpgs([summary(group_a, 0.6), summary(group_b, 0.6)], 0.1) == []

    def test_constructed_gap_flags_disadvantaged_group(self, gap_schema):
        group_a, group_b = groups(gap_schema)
        flags = flag_tpgs([summary(group_a, 0.7), summary(group_b, 0.4)], 0.1)
        assert [f.group for f in flags] == [group_b]
        assert flags[0].statistic == "mean_probability"
        assert flags[0].gap == pytest.approx(0.3)
        assert flags[0].reference == group_a

    def test_accuracy_gap(self, gap_schema):
        group_a, group_b = groups(gap_schema)
        wrong = np.array([0.0] * 5 + [1.0] * 5)
        flags = flag_tpgs([summary(group_a, 0.6), summary(group_b, 0.6, wrong)], 0.1)
        assert [(f.group, f.statistic) for f in flags] == [(group_b, "accuracy")]

    def test_threshold_one_never_flags(self, gap_schema):
        group_a, group_b = groups(gap_schema)
        assert flag_tpgs([summary(group_a, 1.0), summary(group_b, 0.0)], 1.0) == []

    def test_order_invariant(self, census_schema):
        summaries = [
            summary(GroupPredicate.of(census_schema, Gender="female"), 0.2),
            summary(GroupPredicate.of(census_schema, Gender="male"), 0.6),
            summary(GroupPredicate.of(census_schema, Ethnicity="AfricanAmerican"), 0.3),
            summary(GroupPredicate.of(census_schema, Ethnicity="Caucasian"), 0.5),
        ]
        forward_flags = flag_tpgs(summaries, 0.1)
        assert flag_tpgs(list(reversed(summaries)), 0.1) == forward_flags
        assert {str(f.group) for f in forward_flags} == {
            "Gender=female",
            "Ethnicity=AfricanAmerican",
        }

    def test_single_group_attribute_skipped(self, gap_schema, caplog):
        group_a, _ = groups(gap_schema)
        assert flag_tpgs([summary(group_a, 0.1)], 0.1) == []
        assert "single group" in caplog.text

    def test_negative_threshold_rejected(self, gap_schema):
        with pytest.raises(ParameterError):
            flag_tpgs([], -0.1)


class TestAnalyze:
    def test_constructed_gap_dataset(self, trained_clf, gap_table, gap_schema):
        report = analyze(trained_clf, gap_table)
        assert list(report.summaries) == ["group=A", "group=B"]
        assert report.flagged == [GroupPredicate.of(gap_schema, group="B")]
        assert report.summaries["group=A"].size + report.summaries["group=B"].size == len(
            gap_table
        )

    def test_deterministic(self, trained_clf, gap_table):
        first = analyze(trained_clf, gap_table)
        assert first.to_dict() == analyze(trained_clf, gap_table).to_dict()

    def test_duplicate_groups_reported_once(self, trained_clf, gap_table, gap_schema):
        group_a, group_b = groups(gap_schema)
        report = analyze(trained_clf, gap_table, [group_a, group_b, group_a])
        assert list(report.to_dict()["groups"]) == ["group=A", "group=B"]

    def test_binomial_half_width(self, trained_clf, gap_table):
        report = analyze(trained_clf, gap_table)
        s = report.summaries["group=A"]
        expected = 1.96 * np.sqrt(s.accuracy * (1 - s.accuracy) / s.size)
        assert s.accuracy_half_width == pytest.approx(expected)

    def test_histogram_csv(self, trained_clf, gap_table):
        text = histogram_csv_text(analyze(trained_clf, gap_table))
        lines = text.splitlines()
        assert lines[0] == "group,bin_lo,bin_hi,count,normalized"
        assert len(lines) == 1 + 2 * 10
        assert lines[1].startswith("group=A,0.0,0.1,")

    def test_svg_is_reproducible(self, trained_clf, gap_table):
        report = analyze(trained_clf, gap_table)
        svg = render_svg(report)
        assert "<svg" in svg
        assert svg == render_svg(report)
