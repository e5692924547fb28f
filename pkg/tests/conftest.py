"""Pytest configuration and fixtures."""

from pathlib import Path

import numpy as np
import pytest

from src.classifier import ClassifierConfig
from src.config import get_settings
from src.dataset import DatasetTable, Schema, to_csv_text


@pytest.fixture(autouse=True)
def _isolated_settings(monkeypatch):
    """Each test sees a fresh Settings instance without FAIRGEN_SEED."""
    monkeypatch.delenv("FAIRGEN_SEED", raising=False)
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def census_schema():
    """Small Adult-style schema with two sensitive attributes."""
    return Schema.model_validate(
        {
            "columns": [
                {"name": "age", "kind": "numeric", "integer": True},
                {"name": "hours", "kind": "numeric"},
                {"name": "education", "kind": "categorical", "values": ["HS", "BSc", "MSc"]},
                {
                    "name": "Gender",
                    "kind": "categorical",
                    "values": ["female", "male"],
                    "sensitive": True,
                },
                {
                    "name": "Ethnicity",
                    "kind": "categorical",
                    "values": ["AfricanAmerican", "Caucasian"],
                    "sensitive": True,
                },
                {
                    "name": "income",
                    "kind": "categorical",
                    "values": ["<=50K", ">50K"],
                    "label": True,
                },
            ]
        }
    )


def make_census_table(schema: Schema, rows: int, seed: int = 0) -> DatasetTable:
    rng = np.random.default_rng(seed)
    age = rng.integers(18, 70, size=rows)
    hours = np.round(rng.uniform(10, 60, size=rows), 1)
    education = rng.choice(["HS", "BSc", "MSc"], size=rows)
    gender = rng.choice(["female", "male"], size=rows)
    ethnicity = rng.choice(["AfricanAmerican", "Caucasian"], size=rows)
    income = np.where(hours + (age - 18) * 0.3 > 45, ">50K", "<=50K")
    records = [
        {
            "age": int(age[i]),
            "hours": float(hours[i]),
            "education": str(education[i]),
            "Gender": str(gender[i]),
            "Ethnicity": str(ethnicity[i]),
            "income": str(income[i]),
        }
        for i in range(rows)
    ]
    return DatasetTable.from_records(schema, records)


@pytest.fixture
def census_table(census_schema):
    """200 random census-style rows."""
    return make_census_table(census_schema, 200)


@pytest.fixture
def gap_schema():
    """Two numeric features, one sensitive attribute, binary label."""
    return Schema.model_validate(
        {
            "columns": [
                {"name": "x1", "kind": "numeric"},
                {"name": "x2", "kind": "numeric"},
                {"name": "group", "kind": "categorical", "values": ["A", "B"], "sensitive": True},
                {"name": "label", "kind": "categorical", "values": ["neg", "pos"], "label": True},
            ]
        }
    )


def make_gap_table(schema: Schema, rows: int = 400, seed: int = 0) -> DatasetTable:
    """Groups A (90%) and B (10%); label = x1 > 0 in both groups, but B's x1
    is shifted negative, so B's mean positive probability is far lower."""
    rng = np.random.default_rng(seed)
    n_b = rows // 10
    group = np.array(["A"] * (rows - n_b) + ["B"] * n_b)
    x1 = np.where(group == "A", rng.uniform(-0.5, 2.0, rows), rng.uniform(-2.0, 0.5, rows))
    x2 = rng.uniform(-1.0, 1.0, rows)
    records = [
        {
            "x1": round(float(x1[i]), 3),
            "x2": round(float(x2[i]), 3),
            "group": str(group[i]),
            "label": "pos" if x1[i] > 0 else "neg",
        }
        for i in range(rows)
    ]
    return DatasetTable.from_records(schema, records)


@pytest.fixture
def gap_table(gap_schema):
    """Constructed-gap fixture: group B is disadvantaged."""
    return make_gap_table(gap_schema)


def make_minority_table(
    schema: Schema, rows: int = 1500, minority: float = 0.08, seed: int = 0
) -> DatasetTable:
    """One labelling rule for everyone: pos iff x1 * x2 > 0.

    A lives at x2 > 0 and B at x2 < 0, so B's rows are the only evidence for
    the flipped half of the rule. With B at `minority` of the rows a
    classifier mostly learns A's half.
    """
    rng = np.random.default_rng(seed)
    n_b = int(round(rows * minority))
    group = np.array(["A"] * (rows - n_b) + ["B"] * n_b)
    x1 = rng.uniform(-2.0, 2.0, rows)
    x2 = np.where(group == "A", rng.uniform(0.1, 1.0, rows), rng.uniform(-1.0, -0.1, rows))
    records = [
        {
            "x1": round(float(x1[i]), 3),
            "x2": round(float(x2[i]), 3),
            "group": str(group[i]),
            "label": "pos" if x1[i] * x2[i] > 0 else "neg",
        }
        for i in range(rows)
    ]
    return DatasetTable.from_records(schema, records)


@pytest.fixture
def minority_table(gap_schema):
    """Under-represented group B whose rows follow the same rule as A's."""
    return make_minority_table(gap_schema)


@pytest.fixture
def small_clf_config():
    """Classifier settings small enough for unit tests."""
    return ClassifierConfig(
        hidden_units=16, epochs=60, learning_rate=0.05, momentum=0.9, batch_size=32, seed=3
    )


@pytest.fixture
def write_table(tmp_path: Path):
    """Write a table (without provenance) plus its schema; returns both paths."""

    def _write(table: DatasetTable, name: str = "data") -> tuple[Path, Path]:
        data = tmp_path / f"{name}.csv"
        data.write_text(to_csv_text(table, with_provenance=False), encoding="utf-8")
        schema = tmp_path / "schema.json"
        schema.write_text(table.schema.model_dump_json(indent=2), encoding="utf-8")
        return data, schema

    return _write
