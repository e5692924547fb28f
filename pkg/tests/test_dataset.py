"""Tests for schemas, CSV ingestion, encoding, splitting and augmentation."""

import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from src.dataset import (
    AugmentationPlan,
    DatasetTable,
    GroupPredicate,
    Provenance,
    Schema,
    augment,
    augmentation_count,
    enumerate_groups,
    fit_encoder,
    load_csv,
    load_schema,
    split,
    to_csv_text,
)
from src.exceptions import AugmentationError, IngestionError, ParameterError
from src.numerics import SeededRng
from tests.conftest import make_census_table

HEADER = "age,hours,education,Gender,Ethnicity,income\n"


def synthetic_pool(table: DatasetTable, group: GroupPredicate, rows: int) -> DatasetTable:
    """`rows` copies of the group's first row, tagged synthetic."""
    first = table.where(group).records()[0]
    return DatasetTable.from_records(table.schema, [first] * rows, Provenance.SYNTHETIC)


class TestSchema:
    def test_load_schema(self, tmp_path, census_schema):
        path = tmp_path / "schema.json"
        path.write_text(census_schema.model_dump_json())
        loaded = load_schema(path)
        assert loaded.names == census_schema.names
        assert [c.name for c in loaded.sensitive_columns] == ["Gender", "Ethnicity"]
        assert loaded.positive_value == ">50K"

    @pytest.mark.parametrize(
        "columns",
        [
            [{"name": "x", "kind": "numeric"}],
            [
                {"name": "y", "kind": "categorical", "values": ["a", "b", "c"], "label": True},
            ],
            [
                {"name": "c", "kind": "categorical", "values": ["a", "a"]},
                {"name": "y", "kind": "categorical", "values": ["n", "p"], "label": True},
            ],
            [
                {"name": "c", "kind": "categorical", "values": []},
                {"name": "y", "kind": "categorical", "values": ["n", "p"], "label": True},
            ],
        ],
    )
    def test_invalid_schemas(self, tmp_path, columns):
        path = tmp_path / "schema.json"
        path.write_text(json.dumps({"columns": columns}))
        with pytest.raises(IngestionError):
            load_schema(path)


class TestGroupPredicate:
    def test_parse_conjunction_orders_by_schema(self, census_schema):
        group = GroupPredicate.parse("Ethnicity=AfricanAmerican, Gender=female", census_schema)
        assert str(group) == "Gender=female,Ethnicity=AfricanAmerican"
        assert group.columns == ("Gender", "Ethnicity")

    @pytest.mark.parametrize("text", ["", "*"])
    def test_empty_predicate_matches_everything(self, census_schema, census_table, text):
        group = GroupPredicate.parse(text, census_schema)
        assert census_table.group_count(group) == len(census_table)

    @pytest.mark.parametrize(
        "text", ["Gender=other", "education=HS", "Gender", "Gender=female,Gender=male", "x=1"]
    )
    def test_invalid_predicates(self, census_schema, text):
        with pytest.raises(ParameterError):
            GroupPredicate.parse(text, census_schema)

    def test_group_count_matches_row_scan(self, census_schema, census_table):
        groups = enumerate_groups(census_schema) + [
            GroupPredicate.of(census_schema, Gender="female", Ethnicity="AfricanAmerican")
        ]
        for group in groups:
            expected = sum(
                all(row[col] == value for col, value in group.terms)
                for row in census_table.records()
            )
            assert census_table.group_count(group) == expected

    def test_enumerate_groups(self, census_schema):
        assert [str(g) for g in enumerate_groups(census_schema)] == [
            "Gender=female",
            "Gender=male",
            "Ethnicity=AfricanAmerican",
            "Ethnicity=Caucasian",
        ]


class TestLoadCsv:
    def test_empty_data_section(self, tmp_path, census_schema):
        path = tmp_path / "d.csv"
        path.write_text(HEADER)
        with pytest.raises(IngestionError, match="no rows"):
            load_csv(path, census_schema)

    def test_unknown_category_cites_line(self, tmp_path, census_schema):
        path = tmp_path / "d.csv"
        path.write_text(
            HEADER
            + "30,40,HS,female,Caucasian,<=50K\n"
            + "31,41,PhD,male,Caucasian,>50K\n"
        )
        with pytest.raises(IngestionError, match="line 3"):
            load_csv(path, census_schema)

    def test_bad_number_cites_line(self, tmp_path, census_schema):
        path = tmp_path / "d.csv"
        path.write_text(HEADER + "thirty,40,HS,female,Caucasian,<=50K\n")
        with pytest.raises(IngestionError, match="line 2.*age"):
            load_csv(path, census_schema)

    def test_header_mismatch(self, tmp_path, census_schema):
        path = tmp_path / "d.csv"
        path.write_text("age,hours\n1,2\n")
        with pytest.raises(IngestionError, match="header"):
            load_csv(path, census_schema)

    def test_missing_values_dropped_with_warning(self, tmp_path, census_schema, caplog):
        path = tmp_path / "d.csv"
        path.write_text(
            HEADER
            + "30,40,HS,female,Caucasian,<=50K\n"
            + "31,?,BSc,male,Caucasian,>50K\n"
            + "32,38,MSc,male,AfricanAmerican,>50K\n"
        )
        table = load_csv(path, census_schema)
        assert len(table) == 2
        assert "line" in caplog.text and "3" in caplog.text

    def test_adult_style_fixture(self, tmp_path, census_schema):
        table = make_census_table(census_schema, 100, seed=4)
        path = tmp_path / "adult.csv"
        path.write_text(to_csv_text(table, with_provenance=False))
        loaded = load_csv(path, census_schema)
        assert len(loaded) == 100
        assert set(loaded.frame["Gender"]) <= {"female", "male"}
        assert set(loaded.frame["Ethnicity"]) <= {"AfricanAmerican", "Caucasian"}
        assert np.all(loaded.provenance == Provenance.ORIGINAL.value)

    def test_cell_text_is_written_back_verbatim(self, tmp_path, census_schema, census_table):
        path = tmp_path / "d.csv"
        rows = ["30, 40.50,HS, female,Caucasian,<=50K", "031,1e1, MSc,male,AfricanAmerican, >50K"]
        path.write_text(HEADER + "".join(f"{r}\n" for r in rows))
        loaded = load_csv(path, census_schema)
        assert loaded.frame["hours"].tolist() == [40.5, 10.0]
        assert loaded.frame["Gender"].tolist() == ["female", "male"]

        extra = census_table.take(np.array([0]))
        text = to_csv_text(loaded.concat(extra), with_provenance=False)
        lines = text.splitlines()
        assert lines[1:3] == rows
        assert lines[3] == to_csv_text(extra, with_provenance=False).splitlines()[1]
        single = to_csv_text(loaded.take(np.array([1])), with_provenance=False)
        assert single == HEADER + rows[1] + "\n"

    def test_provenance_column_round_trip(self, tmp_path, census_table):
        path = tmp_path / "d.csv"
        path.write_text(to_csv_text(census_table))
        loaded = load_csv(path, census_table.schema)
        assert to_csv_text(loaded) == to_csv_text(census_table)


class TestEncoding:
    def test_one_hot_in_declared_order(self, census_schema, census_table):
        encoder = fit_encoder(census_table, ["Gender"])
        females = census_table.where(GroupPredicate.of(census_schema, Gender="female"))
        assert_array_equal(encoder.encode(females)[0], [1.0, 0.0])

    def test_numeric_endpoints(self, census_table):
        encoder = fit_encoder(census_table, ["hours"])
        encoded = encoder.encode(census_table)[:, 0]
        hours = census_table.frame["hours"].to_numpy()
        assert encoded[np.argmin(hours)] == 0.0
        assert encoded[np.argmax(hours)] == 1.0

    def test_layout_numeric_first(self, census_table):
        encoder = fit_encoder(census_table)
        assert encoder.numeric_columns == ["age", "hours"]
        assert encoder.categorical_blocks == (
            ("education", 3),
            ("Gender", 2),
            ("Ethnicity", 2),
            ("income", 2),
        )
        assert encoder.width == 11

    def test_round_trip(self, census_schema):
        table = make_census_table(census_schema, 1000, seed=2)
        encoder = fit_encoder(table)
        decoded = encoder.decode(encoder.encode(table), provenance=Provenance.ORIGINAL)
        for col in ("education", "Gender", "Ethnicity", "income"):
            assert_array_equal(decoded.frame[col], table.frame[col])
        for col in ("age", "hours"):
            assert_allclose(decoded.frame[col], table.frame[col], rtol=0, atol=1e-9)

    def test_integer_columns_rounded(self, census_table):
        encoder = fit_encoder(census_table, ["age"])
        matrix = np.array([[0.01], [0.5]])
        decoded = encoder.decode_frame(matrix)
        assert np.all(decoded["age"] == np.rint(decoded["age"]))

    def test_constant_column_encodes_to_zero(self, census_schema, caplog):
        table = make_census_table(census_schema, 20)
        frame = table.frame.copy()
        frame["hours"] = 40.0
        constant = DatasetTable.from_frame(census_schema, frame)
        encoder = fit_encoder(constant, ["hours"])
        assert_array_equal(encoder.encode(constant), 0.0)
        assert "constant" in caplog.text

    def test_encoder_serialization(self, census_table):
        encoder = fit_encoder(census_table)
        restored = type(encoder).from_dict(census_table.schema, encoder.to_dict())
        assert_array_equal(restored.encode(census_table), encoder.encode(census_table))


class TestSplit:
    def test_exact_sizes(self, census_schema):
        table = make_census_table(census_schema, 100)
        parts = split(table, [0.6, 0.2, 0.2], SeededRng(0))
        assert [len(p) for p in parts] == [60, 20, 20]

    def test_deterministic_and_disjoint(self, census_table):
        first = split(census_table, [0.5, 0.5], SeededRng(3))
        second = split(census_table, [0.5, 0.5], SeededRng(3))
        for a, b in zip(first, second, strict=True):
            assert to_csv_text(a) == to_csv_text(b)
        together = sorted(r["age"] + r["hours"] for p in first for r in p.records())
        assert together == sorted(r["age"] + r["hours"] for r in census_table.records())

    def test_label_stratified(self, census_table):
        train, test = split(census_table, [0.75, 0.25], SeededRng(1))
        overall = census_table.label_indicator().mean()
        assert abs(train.label_indicator().mean() - overall) < 0.02
        assert abs(test.label_indicator().mean() - overall) < 0.03

    @pytest.mark.parametrize("fractions", [[1.0, 0.0, 0.0], [1.0], [0.5, 0.4]])
    def test_invalid_fractions(self, census_table, fractions):
        with pytest.raises(ParameterError):
            split(census_table, fractions, SeededRng(0))


class TestAugment:
    @pytest.mark.parametrize(
        "fraction,size,expected", [(0.85, 200, 170), (3.0, 50, 150), (0.5, 3, 2), (0.0, 9, 0)]
    )
    def test_augmentation_count(self, fraction, size, expected):
        assert augmentation_count(fraction, size) == expected

    def test_fraction_zero_is_identity(self, census_schema, census_table):
        females = GroupPredicate.of(census_schema, Gender="female")
        pool = synthetic_pool(census_table, females, 5)
        out = augment(census_table, pool, AugmentationPlan.from_pairs([(females, 0.0)]))
        assert to_csv_text(out) == to_csv_text(census_table)

    def test_appends_group_relative_rows(self, census_schema, census_table):
        females = GroupPredicate.of(census_schema, Gender="female")
        n_g = census_table.group_count(females)
        needed = augmentation_count(0.85, n_g)
        pool = synthetic_pool(census_table, females, needed + 3)
        out = augment(census_table, pool, AugmentationPlan.from_pairs([(females, 0.85)]))
        assert len(out) == len(census_table) + needed
        assert out.group_count(females) == n_g + needed
        assert int(np.sum(out.provenance == "synthetic")) == needed
        assert to_csv_text(out.take(np.arange(len(census_table)))) == to_csv_text(census_table)

    def test_base_counts_only_original_rows(self, census_schema, census_table):
        females = GroupPredicate.of(census_schema, Gender="female")
        n_g = census_table.group_count(females)
        pool = synthetic_pool(census_table, females, 4 * n_g)
        plan = AugmentationPlan.from_pairs([(females, 1.0)])
        once = augment(census_table, pool, plan)
        twice = augment(once, pool.take(np.arange(n_g, 4 * n_g)), plan)
        assert len(twice) == len(census_table) + 2 * n_g

    def test_shortfall_reports_deficit(self, census_schema, census_table):
        females = GroupPredicate.of(census_schema, Gender="female")
        pool = synthetic_pool(census_table, females, 1)
        with pytest.raises(AugmentationError, match="short by"):
            augment(census_table, pool, AugmentationPlan.from_pairs([(females, 1.0)]))

    def test_pool_rows_not_reused_across_entries(self, census_schema, census_table):
        females = GroupPredicate.of(census_schema, Gender="female")
        needed = augmentation_count(0.1, census_table.group_count(females))
        plan = AugmentationPlan.from_pairs([(females, 0.1), (females, 0.1)])
        with pytest.raises(AugmentationError):
            augment(census_table, synthetic_pool(census_table, females, needed), plan)
        out = augment(census_table, synthetic_pool(census_table, females, 2 * needed), plan)
        assert len(out) == len(census_table) + 2 * needed

    def test_pool_must_be_synthetic(self, census_schema, census_table):
        females = GroupPredicate.of(census_schema, Gender="female")
        with pytest.raises(ParameterError):
            augment(census_table, census_table, AugmentationPlan.from_pairs([(females, 0.1)]))

    @pytest.mark.parametrize("fraction", [-0.1, float("nan"), float("inf")])
    def test_invalid_fraction(self, census_schema, fraction):
        females = GroupPredicate.of(census_schema, Gender="female")
        with pytest.raises(ParameterError):
            AugmentationPlan.from_pairs([(females, fraction)])
