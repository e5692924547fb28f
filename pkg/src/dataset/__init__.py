"""Tabular ingestion, encoding, splitting and augmentation."""

from src.dataset.encoding import TableEncoder, fit_encoder
from src.dataset.ops import augment, augmentation_count, split
from src.dataset.schema import (
    AugmentationPlan,
    ColumnKind,
    ColumnSpec,
    GroupPredicate,
    PlanEntry,
    Schema,
    enumerate_groups,
    load_schema,
)
from src.dataset.table import (
    DatasetTable,
    Provenance,
    load_csv,
    to_csv_text,
    write_csv,
)

__all__ = [
    "AugmentationPlan",
    "ColumnKind",
    "ColumnSpec",
    "DatasetTable",
    "GroupPredicate",
    "PlanEntry",
    "Provenance",
    "Schema",
    "TableEncoder",
    "augment",
    "augmentation_count",
    "enumerate_groups",
    "fit_encoder",
    "load_csv",
    "load_schema",
    "split",
    "to_csv_text",
    "write_csv",
]
