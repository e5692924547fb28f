"""Typed tabular data: CSV ingestion, emission and group selection."""

import enum
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from src.dataset.schema import MISSING_MARKERS, ColumnKind, GroupPredicate, Schema
from src.exceptions import IngestionError, ParameterError
from src.utils.artifacts import atomic_write_text, format_real

logger = logging.getLogger(__name__)

PROVENANCE_COLUMN = "provenance"


class Provenance(enum.Enum):
    ORIGINAL = "original"
    SYNTHETIC = "synthetic"


@dataclass(frozen=True, eq=False)
class DatasetTable:
    """Rows conforming to a schema, each tagged original or synthetic.

    `frame` holds one column per schema column: float64 for numeric columns,
    str for categorical ones. `source` keeps the cell text of rows read from a
    CSV (None for rows built in memory) so they are written back unchanged.
    Tables are treated as immutable.
    """

    schema: Schema
    frame: pd.DataFrame
    provenance: np.ndarray
    source: pd.DataFrame | None = None

    def __post_init__(self) -> None:
        if list(self.frame.columns) != self.schema.names:
            raise ParameterError("table columns do not match the schema")
        if len(self.provenance) != len(self.frame):
            raise ParameterError("provenance length does not match row count")
        if self.source is not None and self.source.shape != self.frame.shape:
            raise ParameterError("source cells do not match the table shape")
        for col in self.schema.columns:
            series = self.frame[col.name]
            if col.is_numeric:
                if not np.all(np.isfinite(series.to_numpy(dtype=np.float64))):
                    raise ParameterError(f"column {col.name!r} has non-finite values")
            elif not series.isin(col.values or []).all():
                raise ParameterError(f"column {col.name!r} has undeclared categories")

    @classmethod
    def from_records(
        cls,
        schema: Schema,
        records: Sequence[dict[str, object]],
        provenance: Provenance = Provenance.ORIGINAL,
    ) -> "DatasetTable":
        frame = pd.DataFrame(list(records), columns=schema.names)
        return cls.from_frame(schema, frame, provenance)

    @classmethod
    def from_frame(
        cls,
        schema: Schema,
        frame: pd.DataFrame,
        provenance: Provenance = Provenance.ORIGINAL,
    ) -> "DatasetTable":
        typed = pd.DataFrame(index=pd.RangeIndex(len(frame)))
        for col in schema.columns:
            values = frame[col.name].to_numpy()
            if col.is_numeric:
                typed[col.name] = values.astype(np.float64)
            else:
                typed[col.name] = values.astype(str).astype(object)
        return cls(schema, typed, np.full(len(frame), provenance.value, dtype=object))

    def __len__(self) -> int:
        return len(self.frame)

    def group_mask(self, group: GroupPredicate) -> np.ndarray:
        return group.mask(self.frame)

    def group_count(self, group: GroupPredicate, original_only: bool = False) -> int:
        mask = self.group_mask(group)
        if original_only:
            mask &= self.provenance == Provenance.ORIGINAL.value
        return int(np.count_nonzero(mask))

    def take(self, indices: np.ndarray) -> "DatasetTable":
        indices = np.asarray(indices, dtype=np.int64)
        frame = self.frame.iloc[indices].reset_index(drop=True)
        source = None
        if self.source is not None:
            source = self.source.iloc[indices].reset_index(drop=True)
        return DatasetTable(self.schema, frame, self.provenance[indices].copy(), source)

    def where(self, group: GroupPredicate) -> "DatasetTable":
        return self.take(np.flatnonzero(self.group_mask(group)))

    def concat(self, *others: "DatasetTable") -> "DatasetTable":
        for other in others:
            if other.schema.fingerprint() != self.schema.fingerprint():
                raise ParameterError("cannot concatenate tables with different schemas")
        if not others:
            return self
        frame = pd.concat([self.frame, *(o.frame for o in others)], ignore_index=True)
        provenance = np.concatenate([self.provenance, *(o.provenance for o in others)])
        parts = [self, *others]
        source = None
        if any(t.source is not None for t in parts):
            source = pd.concat([t.source_cells() for t in parts], ignore_index=True)
        return DatasetTable(self.schema, frame, provenance, source)

    def source_cells(self) -> pd.DataFrame:
        """Original cell text per row, None where a row has no source."""
        if self.source is not None:
            return self.source
        return pd.DataFrame(None, index=self.frame.index, columns=self.schema.names, dtype=object)

    def label_indicator(self) -> np.ndarray:
        """1.0 where the label equals the positive value, else 0.0."""
        label = self.schema.label_column.name
        return (self.frame[label] == self.schema.positive_value).to_numpy(dtype=np.float64)

    def records(self) -> list[dict[str, object]]:
        return self.frame.to_dict(orient="records")


def load_csv(
    path: str | Path,
    schema: Schema,
    provenance: Provenance = Provenance.ORIGINAL,
) -> DatasetTable:
    """Load an RFC-4180 CSV with a header row matching the schema.

    Rows with a missing cell ('' or '?') are dropped with a warning; any other
    invalid cell raises an IngestionError citing its line. A trailing
    provenance column, when present, overrides `provenance`. Cells are parsed
    with surrounding whitespace stripped; their text is kept verbatim.
    """
    try:
        raw = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=False,
            encoding="utf-8",
        )
    except FileNotFoundError as e:
        raise IngestionError(f"data file not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise IngestionError(f"{path}: no rows") from e
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise IngestionError(f"{path}: malformed CSV: {e}") from e

    header = [str(c).strip() for c in raw.columns]
    raw.columns = header
    names = schema.names
    if header not in (names, [*names, PROVENANCE_COLUMN]):
        raise IngestionError(f"{path}: header {header} does not match schema columns {names}")
    if raw.empty:
        raise IngestionError(f"{path}: no rows")

    source = raw.fillna("")
    raw = source.apply(lambda s: s.str.strip())
    # Header is line 1.
    lines = np.arange(len(raw)) + 2

    missing = raw[names].isin(MISSING_MARKERS).any(axis=1).to_numpy()
    if missing.any():
        dropped = lines[missing]
        preview = ", ".join(str(n) for n in dropped[:10])
        logger.warning(
            f"{path}: dropped {len(dropped)} row(s) with missing values (lines {preview}"
            f"{', ...' if len(dropped) > 10 else ''})"
        )
        raw = raw.loc[~missing].reset_index(drop=True)
        source = source.loc[~missing].reset_index(drop=True)
        lines = lines[~missing]
    if raw.empty:
        raise IngestionError(f"{path}: no rows")

    frame = pd.DataFrame(index=pd.RangeIndex(len(raw)))
    for col in schema.columns:
        cells = raw[col.name]
        if col.kind is ColumnKind.NUMERIC:
            values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
            bad = ~np.isfinite(values)
            if bad.any():
                i = int(np.argmax(bad))
                raise IngestionError(
                    f"{path}: line {lines[i]}: column {col.name!r}: "
                    f"value {cells.iloc[i]!r} is not a finite number"
                )
            frame[col.name] = values
        else:
            bad = ~cells.isin(col.values or []).to_numpy()
            if bad.any():
                i = int(np.argmax(bad))
                raise IngestionError(
                    f"{path}: line {lines[i]}: column {col.name!r}: "
                    f"unknown categorical value {cells.iloc[i]!r}"
                )
            frame[col.name] = cells.to_numpy().astype(object)

    if PROVENANCE_COLUMN in raw.columns:
        tags = raw[PROVENANCE_COLUMN]
        allowed = [p.value for p in Provenance]
        bad = ~tags.isin(allowed).to_numpy()
        if bad.any():
            i = int(np.argmax(bad))
            raise IngestionError(
                f"{path}: line {lines[i]}: column 'provenance': "
                f"unknown value {tags.iloc[i]!r}"
            )
        tag_values = tags.to_numpy().astype(object)
    else:
        tag_values = np.full(len(frame), provenance.value, dtype=object)

    cells = source[names].astype(object)
    table = DatasetTable(schema, frame, tag_values, cells)
    logger.info(f"Loaded {len(table)} rows from {path}")
    return table


def to_csv_text(table: DatasetTable, with_provenance: bool = True) -> str:
    """Render the table as CSV.

    Rows read from a CSV keep their cell text; other rows print integral reals
    without a trailing '.0'.
    """
    out = pd.DataFrame(index=table.frame.index)
    source = table.source_cells()
    for col in table.schema.columns:
        series = table.frame[col.name]
        if col.is_numeric:
            rendered = pd.Series(
                [format_real(v) for v in series.to_numpy(dtype=np.float64)],
                index=series.index,
                dtype=object,
            )
        else:
            rendered = series.astype(str).astype(object)
        kept = source[col.name]
        out[col.name] = kept.where(kept.notna(), rendered)
    if with_provenance:
        out[PROVENANCE_COLUMN] = table.provenance.astype(str)
    return out.to_csv(index=False, lineterminator="\n")


def write_csv(table: DatasetTable, path: str | Path, with_provenance: bool = True) -> Path:
    return atomic_write_text(path, to_csv_text(table, with_provenance))
