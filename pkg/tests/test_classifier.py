"""Tests for classifier training, checkpoints and the repeated-run protocol."""

import logging
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from src.classifier import (
    ClassifierConfig,
    EvalResult,
    Interval,
    accuracy,
    ci_half_width,
    comparison_csv_text,
    comparison_table,
    evaluate_ci,
    load_classifier,
    predict_proba,
    save_classifier,
    sweep_hidden_units,
    train_classifier,
)
from src.dataset import DatasetTable, GroupPredicate, split
from src.exceptions import IngestionError, ParameterError, TrainingError
from src.nn import HeadKind, hidden_layers, init_mlp
from src.numerics import SeededRng
from tests.conftest import make_census_table


def separable_table(schema, rows: int = 400, seed: int = 1) -> DatasetTable:
    """Label is x1 + x2 > 0, with a margin band around the boundary removed."""
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(rows, 2))
    keep = np.abs(x.sum(axis=1)) > 0.2
    x = x[keep]
    groups = rng.choice(["A", "B"], size=len(x))
    records = [
        {
            "x1": float(x[i, 0]),
            "x2": float(x[i, 1]),
            "group": str(groups[i]),
            "label": "pos" if x[i].sum() > 0 else "neg",
        }
        for i in range(len(x))
    ]
    return DatasetTable.from_records(schema, records)


@pytest.fixture
def splits(gap_table):
    train, test = split(gap_table, [0.7, 0.3], SeededRng(11))
    return train, test


@pytest.fixture
def tiny_config():
    return ClassifierConfig(hidden_units=8, epochs=5, learning_rate=0.05, batch_size=32, seed=2)


class TestTraining:
    def test_zero_epochs_returns_initialization(self, gap_table):
        config = ClassifierConfig(hidden_units=6, epochs=0, seed=5)
        clf = train_classifier(gap_table, config)
        expected = init_mlp(
            clf.encoder.width, 1, hidden_layers(6), HeadKind.SIGMOID, SeededRng(5)
        )
        for p, q in zip(clf.model.parameters(), expected.parameters(), strict=True):
            assert_array_equal(p, q)

    def test_learns_separable_toy(self, gap_schema):
        table = separable_table(gap_schema)
        config = ClassifierConfig(
            hidden_units=32, epochs=150, learning_rate=0.05, batch_size=32, seed=0
        )
        clf = train_classifier(table, config)
        assert accuracy(clf, table) >= 0.97

    def test_same_seed_same_weights(self, gap_table, tiny_config):
        a = train_classifier(gap_table, tiny_config)
        b = train_classifier(gap_table, tiny_config)
        for p, q in zip(a.model.parameters(), b.model.parameters(), strict=True):
            assert_array_equal(p, q)

    def test_exclude_sensitive_drops_columns(self, census_table, tiny_config):
        clf = train_classifier(census_table, replace(tiny_config, exclude_sensitive=True))
        assert "Gender" not in clf.encoder.columns
        assert "Ethnicity" not in clf.encoder.columns
        assert "income" not in clf.encoder.columns

    def test_probabilities_in_unit_interval(self, gap_table, tiny_config):
        scores = predict_proba(train_classifier(gap_table, tiny_config), gap_table)
        assert scores.shape == (len(gap_table),)
        assert np.all((scores >= 0) & (scores <= 1))

    def test_early_stopping(self, gap_table, caplog):
        caplog.set_level(logging.INFO)
        config = ClassifierConfig(hidden_units=4, epochs=50, learning_rate=0.0, patience=1)
        train_classifier(gap_table, config, validation=gap_table)
        assert "Early stopping at epoch 1" in caplog.text

    def test_empty_table_rejected(self, gap_table, tiny_config):
        with pytest.raises(ParameterError):
            train_classifier(gap_table.take(np.array([], dtype=np.int64)), tiny_config)

    def test_invalid_config_rejected(self):
        with pytest.raises(ParameterError):
            ClassifierConfig(hidden_units=0)


class TestCheckpoint:
    def test_round_trip(self, tmp_path, gap_table, tiny_config):
        clf = train_classifier(gap_table, tiny_config)
        path = save_classifier(tmp_path / "clf.json", clf, {"seed": 2})
        loaded = load_classifier(path, gap_table.schema)
        assert loaded.config == clf.config
        assert_array_equal(predict_proba(loaded, gap_table), predict_proba(clf, gap_table))

    def test_schema_mismatch_rejected(self, tmp_path, gap_table, census_schema, tiny_config):
        path = save_classifier(tmp_path / "clf.json", train_classifier(gap_table, tiny_config))
        with pytest.raises(IngestionError, match="different schema"):
            load_classifier(path, census_schema)


class TestConfidenceIntervals:
    def test_half_width_formula(self):
        assert ci_half_width([0.8, 0.9]) == pytest.approx(0.098)

    def test_needs_two_values(self):
        with pytest.raises(ParameterError):
            ci_half_width([0.8])

    def test_fixed_seed_has_zero_width(self, splits, tiny_config):
        train, test = splits
        result = evaluate_ci(train, test, tiny_config, repeats=3, vary_seed=False)
        assert result.overall.half_width == 0.0
        assert result.seeds == (2, 2, 2)

    def test_seeds_are_consecutive(self, splits, tiny_config):
        train, test = splits
        result = evaluate_ci(train, test, tiny_config, repeats=3)
        assert result.seeds == (2, 3, 4)
        assert len(result.overall.values) == 3

    def test_overall_is_size_weighted_group_mix(self, splits, tiny_config, gap_schema):
        train, test = splits
        group_a = GroupPredicate.of(gap_schema, group="A")
        group_b = GroupPredicate.of(gap_schema, group="B")
        result = evaluate_ci(train, test, tiny_config, repeats=3, groups=[group_a, group_b])
        n_a, n_b = test.group_count(group_a), test.group_count(group_b)
        for r in range(3):
            mixed = (
                n_a * result.per_group["group=A"].values[r]
                + n_b * result.per_group["group=B"].values[r]
            ) / (n_a + n_b)
            assert result.overall.values[r] == pytest.approx(mixed)

    def test_workers_do_not_change_results(self, splits, tiny_config):
        train, test = splits
        serial = evaluate_ci(train, test, tiny_config, repeats=3, workers=1)
        parallel = evaluate_ci(train, test, tiny_config, repeats=3, workers=2)
        assert serial.to_dict() == parallel.to_dict()

    def test_absent_group_skipped(self, census_schema, tiny_config, caplog):
        table = make_census_table(census_schema, 120)
        female = GroupPredicate.of(census_schema, Gender="female")
        test = table.where(GroupPredicate.of(census_schema, Gender="male"))
        result = evaluate_ci(table, test, tiny_config, repeats=2, groups=[female])
        assert result.per_group == {}
        assert "no test rows" in caplog.text

    def test_failing_repeat_is_named(self, gap_table, tiny_config):
        empty = gap_table.take(np.array([], dtype=np.int64))
        with pytest.raises(TrainingError, match="repeat 0 \\(seed 2\\)"):
            evaluate_ci(empty, gap_table, tiny_config, repeats=2)

    def test_one_repeat_rejected(self, splits, tiny_config):
        with pytest.raises(ParameterError):
            evaluate_ci(*splits, tiny_config, repeats=1)

    def test_sweep_covers_default_widths(self, splits):
        train, test = splits
        config = ClassifierConfig(epochs=1, batch_size=128, seed=0)
        results = sweep_hidden_units(train, test, config, repeats=2)
        assert [r.hidden_units for r in results] == [300, 500, 700, 900]

    def test_result_round_trip(self, splits, tiny_config):
        result = evaluate_ci(*splits, tiny_config, repeats=2)
        assert EvalResult.from_dict(result.to_dict()) == result

    def test_malformed_result_rejected(self):
        with pytest.raises(IngestionError):
            EvalResult.from_dict({"repeats": 2})


class TestComparisonTable:
    def result(self, hidden_units, mean, half_width):
        return EvalResult(
            config=ClassifierConfig(hidden_units=hidden_units),
            repeats=10,
            seeds=tuple(range(10)),
            overall=Interval(mean, half_width),
            per_group={"Gender=female": Interval(mean - 0.1, half_width)},
        )

    def test_cells(self):
        table = comparison_table(
            {
                "original": [self.result(300, 0.85, 0.098), self.result(500, 0.8, 0.01)],
                "augmented": [self.result(300, 0.9, 0.005)],
            }
        )
        assert list(table.columns) == ["configuration", "Acc. (300 HUs)", "Acc. (500 HUs)"]
        assert table.iloc[0]["Acc. (300 HUs)"] == "85.00 ± 9.80"
        assert table.iloc[1]["Acc. (500 HUs)"] == ""

    def test_group_cells(self):
        table = comparison_table({"original": [self.result(300, 0.85, 0.01)]}, "Gender=female")
        assert table.iloc[0]["Acc. (300 HUs)"] == "75.00 ± 1.00"

    def test_missing_group_rejected(self):
        with pytest.raises(ParameterError):
            comparison_table({"original": [self.result(300, 0.85, 0.01)]}, "Gender=male")

    def test_csv_header(self):
        text = comparison_csv_text(comparison_table({"original": [self.result(300, 0.5, 0.0)]}))
        assert text.splitlines()[0] == "configuration,Acc. (300 HUs)"
