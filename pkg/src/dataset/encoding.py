"""Min-max / one-hot encoding of tables into float matrices, and back."""

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd

from src.dataset.schema import Schema
from src.dataset.table import DatasetTable, Provenance
from src.exceptions import ParameterError, ShapeError
from src.numerics import Matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TableEncoder:
    """Encodes a subset of schema columns.

    Layout: numeric columns first (schema order), each min-max scaled with
    stored bounds, then one one-hot block per categorical column (schema
    order, declared value order).
    """

    schema: Schema
    columns: tuple[str, ...]
    bounds: Mapping[str, tuple[float, float]]

    @property
    def numeric_columns(self) -> list[str]:
        return [c for c in self.columns if self.schema.column(c).is_numeric]

    @property
    def categorical_columns(self) -> list[str]:
        return [c for c in self.columns if not self.schema.column(c).is_numeric]

    @property
    def categorical_blocks(self) -> tuple[tuple[str, int], ...]:
        return tuple(
            (c, len(self.schema.column(c).values or [])) for c in self.categorical_columns
        )

    @property
    def numeric_width(self) -> int:
        return len(self.numeric_columns)

    @property
    def width(self) -> int:
        return self.numeric_width + sum(card for _, card in self.categorical_blocks)

    def encode(self, table: DatasetTable) -> Matrix:
        if table.schema.fingerprint() != self.schema.fingerprint():
            raise ParameterError("table schema differs from the encoder schema")
        return self.encode_frame(table.frame)

    def encode_frame(self, frame: pd.DataFrame) -> Matrix:
        out = np.zeros((len(frame), self.width))
        for j, name in enumerate(self.numeric_columns):
            low, high = self.bounds[name]
            values = frame[name].to_numpy(dtype=np.float64)
            if high > low:
                out[:, j] = (values - low) / (high - low)
        start = self.numeric_width
        for name, cardinality in self.categorical_blocks:
            values = self.schema.column(name).values or []
            codes = pd.Categorical(frame[name], categories=values).codes
            if np.any(codes < 0):
                raise ParameterError(f"column {name!r} has undeclared categories")
            out[np.arange(len(frame)), start + codes] = 1.0
            start += cardinality
        return out

    def decode_frame(self, matrix: Matrix) -> pd.DataFrame:
        """Inverse of encode_frame for the encoded columns; categoricals by argmax."""
        if matrix.ndim != 2 or matrix.shape[1] != self.width:
            raise ShapeError(f"matrix shape {matrix.shape} does not fit encoder width {self.width}")
        frame = pd.DataFrame(index=pd.RangeIndex(matrix.shape[0]))
        for j, name in enumerate(self.numeric_columns):
            low, high = self.bounds[name]
            values = low + matrix[:, j] * (high - low)
            if self.schema.column(name).integer:
                values = np.rint(values)
            frame[name] = values
        start = self.numeric_width
        for name, cardinality in self.categorical_blocks:
            declared = np.array(self.schema.column(name).values or [], dtype=object)
            codes = np.argmax(matrix[:, start : start + cardinality], axis=1)
            frame[name] = declared[codes]
            start += cardinality
        return frame

    def decode(
        self,
        matrix: Matrix,
        fixed: Mapping[str, str] | None = None,
        provenance: Provenance = Provenance.SYNTHETIC,
    ) -> DatasetTable:
        """Decode into a full table; columns outside the encoder come from `fixed`."""
        decoded = self.decode_frame(matrix)
        fixed = dict(fixed or {})
        missing = [n for n in self.schema.names if n not in decoded.columns and n not in fixed]
        if missing:
            raise ParameterError(f"decode needs fixed values for columns {missing}")
        for name, value in fixed.items():
            decoded[name] = value
        return DatasetTable.from_frame(self.schema, decoded[self.schema.names], provenance)

    def to_dict(self) -> dict[str, Any]:
        return {
            "columns": list(self.columns),
            "bounds": {name: list(self.bounds[name]) for name in self.numeric_columns},
        }

    @classmethod
    def from_dict(cls, schema: Schema, data: Mapping[str, Any]) -> "TableEncoder":
        bounds = {name: (float(lo), float(hi)) for name, (lo, hi) in data["bounds"].items()}
        return cls(schema, tuple(data["columns"]), bounds)


def fit_encoder(table: DatasetTable, columns: list[str] | None = None) -> TableEncoder:
    """Take numeric bounds from `table` (the training split)."""
    schema = table.schema
    wanted = set(columns) if columns is not None else set(schema.names)
    unknown = wanted - set(schema.names)
    if unknown:
        raise ParameterError(f"unknown columns {sorted(unknown)}")
    ordered = tuple(name for name in schema.names if name in wanted)
    bounds: dict[str, tuple[float, float]] = {}
    for name in ordered:
        if not schema.column(name).is_numeric:
            continue
        values = table.frame[name].to_numpy(dtype=np.float64)
        if len(values) == 0:
            raise ParameterError("cannot fit an encoder on an empty table")
        low, high = float(values.min()), float(values.max())
        if high == low:
            logger.warning(f"Column {name!r} is constant ({low}); it will encode to 0")
        bounds[name] = (low, high)
    return TableEncoder(schema, ordered, bounds)
