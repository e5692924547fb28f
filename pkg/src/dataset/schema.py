"""Schema documents, group predicates and augmentation plans."""

import enum
import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.exceptions import IngestionError, ParameterError

logger = logging.getLogger(__name__)

# Cell values treated as missing; rows containing them are dropped on load.
MISSING_MARKERS = frozenset({"", "?"})


class ColumnKind(enum.Enum):
    NUMERIC = "numeric"
    CATEGORICAL = "categorical"


class ColumnSpec(BaseModel):
    """One schema column."""

    name: str = Field(min_length=1)
    kind: ColumnKind
    values: list[str] | None = Field(
        default=None,
        description="Declared category order (categorical columns only)",
    )
    sensitive: bool = False
    label: bool = False
    integer: bool = Field(default=False, description="Round decoded numeric values")

    @model_validator(mode="after")
    def _check_values(self) -> "ColumnSpec":
        if self.kind is ColumnKind.CATEGORICAL:
            if not self.values:
                raise ValueError(f"categorical column {self.name!r} needs a non-empty value list")
            if len(set(self.values)) != len(self.values):
                raise ValueError(f"categorical column {self.name!r} has duplicate values")
        elif self.values is not None:
            raise ValueError(f"numeric column {self.name!r} cannot declare values")
        if self.integer and self.kind is not ColumnKind.NUMERIC:
            raise ValueError(f"only numeric columns can be integer ({self.name!r})")
        return self

    @property
    def is_numeric(self) -> bool:
        return self.kind is ColumnKind.NUMERIC


class Schema(BaseModel):
    """Typed column layout with exactly one binary label column."""

    columns: list[ColumnSpec]
    positive_label: str | None = Field(
        default=None,
        description="Label value counted as the positive class (defaults to the second value)",
    )

    @model_validator(mode="after")
    def _check_columns(self) -> "Schema":
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        if "provenance" in names:
            raise ValueError("'provenance' is reserved for the provenance column")
        labels = [c for c in self.columns if c.label]
        if len(labels) != 1:
            raise ValueError(f"exactly one label column required, found {len(labels)}")
        label = labels[0]
        if label.kind is not ColumnKind.CATEGORICAL or len(label.values or []) != 2:
            raise ValueError(f"label column {label.name!r} must be categorical with 2 values")
        if label.sensitive:
            raise ValueError(f"label column {label.name!r} cannot be sensitive")
        if self.positive_label is not None and self.positive_label not in (label.values or []):
            raise ValueError(f"positive label {self.positive_label!r} is not a label value")
        return self

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @property
    def label_column(self) -> ColumnSpec:
        return next(c for c in self.columns if c.label)

    @property
    def positive_value(self) -> str:
        values = self.label_column.values or []
        return self.positive_label if self.positive_label is not None else values[1]

    @property
    def sensitive_columns(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.sensitive]

    def column(self, name: str) -> ColumnSpec:
        for col in self.columns:
            if col.name == name:
                return col
        raise ParameterError(f"unknown column {name!r}")

    def fingerprint(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_schema(path: str | Path) -> Schema:
    """Read and validate a schema JSON file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IngestionError(f"cannot read schema {path}: {e}") from e
    try:
        return Schema.model_validate_json(text)
    except ValidationError as e:
        first = e.errors()[0]
        raise IngestionError(f"invalid schema {path}: {first['msg']}") from e


@dataclass(frozen=True)
class GroupPredicate:
    """Conjunction of `sensitive column = value` terms; no terms matches every row."""

    terms: tuple[tuple[str, str], ...] = ()

    def __str__(self) -> str:
        return ",".join(f"{col}={val}" for col, val in self.terms) or "*"

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(col for col, _ in self.terms)

    def as_dict(self) -> dict[str, str]:
        return dict(self.terms)

    @classmethod
    def of(cls, schema: Schema, **terms: str) -> "GroupPredicate":
        return cls.build(schema, list(terms.items()))

    @classmethod
    def build(cls, schema: Schema, terms: list[tuple[str, str]]) -> "GroupPredicate":
        """Validate terms against the schema and order them by schema position."""
        seen: set[str] = set()
        for col, value in terms:
            spec = schema.column(col)
            if not spec.sensitive:
                raise ParameterError(f"column {col!r} is not sensitive")
            if value not in (spec.values or []):
                raise ParameterError(f"value {value!r} is not declared for column {col!r}")
            if col in seen:
                raise ParameterError(f"column {col!r} appears twice in the predicate")
            seen.add(col)
        order = {name: i for i, name in enumerate(schema.names)}
        return cls(tuple(sorted(terms, key=lambda term: order[term[0]])))

    @classmethod
    def parse(cls, text: str, schema: Schema) -> "GroupPredicate":
        """Parse `col=value,col=value`; an empty string or '*' is the whole table."""
        text = text.strip()
        if text in ("", "*"):
            return cls()
        terms = []
        for part in text.split(","):
            col, sep, value = part.partition("=")
            if not sep or not col.strip() or not value.strip():
                raise ParameterError(f"malformed predicate term {part!r} (expected column=value)")
            terms.append((col.strip(), value.strip()))
        return cls.build(schema, terms)

    def mask(self, frame: pd.DataFrame) -> np.ndarray:
        result = np.ones(len(frame), dtype=bool)
        for col, value in self.terms:
            result &= (frame[col] == value).to_numpy()
        return result


def enumerate_groups(schema: Schema) -> list[GroupPredicate]:
    """Single-attribute groups for every value of every sensitive column."""
    return [
        GroupPredicate(((col.name, value),))
        for col in schema.sensitive_columns
        for value in col.values or []
    ]


@dataclass(frozen=True)
class PlanEntry:
    group: GroupPredicate
    fraction: float


@dataclass(frozen=True)
class AugmentationPlan:
    """Ordered (group, fraction) pairs; fraction is relative to the group's original size."""

    entries: tuple[PlanEntry, ...]

    def __post_init__(self) -> None:
        for entry in self.entries:
            if not math.isfinite(entry.fraction) or entry.fraction < 0:
                raise ParameterError(
                    f"fraction for {entry.group} must be finite and >= 0, got {entry.fraction}"
                )

    @classmethod
    def from_pairs(cls, pairs: list[tuple[GroupPredicate, float]]) -> "AugmentationPlan":
        return cls(tuple(PlanEntry(group, float(fraction)) for group, fraction in pairs))
