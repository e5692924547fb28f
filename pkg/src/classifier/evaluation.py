"""Repeated-run evaluation with 95% confidence intervals."""

import logging
import math
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
import pandas as pd

from src.classifier.model import (
    ClassifierConfig,
    accuracy_from_scores,
    predict_proba,
    train_classifier,
)
from src.dataset import DatasetTable, GroupPredicate
from src.exceptions import FairGenError, IngestionError, ParameterError, TrainingError

logger = logging.getLogger(__name__)

Z_95 = 1.96
HIDDEN_UNIT_SWEEP = (300, 500, 700, 900)


def ci_half_width(values: Sequence[float]) -> float:
    """Normal-approximation 95% half-width, 1.96 * s / sqrt(r) with sample std."""
    if len(values) < 2:
        raise ParameterError(f"a confidence interval needs >= 2 values, got {len(values)}")
    return float(Z_95 * np.std(values, ddof=1) / math.sqrt(len(values)))


@dataclass(frozen=True)
class Interval:
    mean: float
    half_width: float
    values: tuple[float, ...] = ()

    @classmethod
    def of(cls, values: Sequence[float]) -> "Interval":
        return cls(float(np.mean(values)), ci_half_width(values), tuple(values))

    def to_dict(self) -> dict[str, Any]:
        return {"mean": self.mean, "half_width": self.half_width, "values": list(self.values)}


@dataclass(frozen=True)
class EvalResult:
    """Overall and per-group accuracy across repeated seeded runs."""

    config: ClassifierConfig
    repeats: int
    seeds: tuple[int, ...]
    overall: Interval
    per_group: dict[str, Interval] = field(default_factory=dict)

    @property
    def hidden_units(self) -> int:
        return self.config.hidden_units

    def to_dict(self) -> dict[str, Any]:
        return {
            "hidden_units": self.hidden_units,
            "repeats": self.repeats,
            "seeds": list(self.seeds),
            "config": self.config.to_dict(),
            "overall": self.overall.to_dict(),
            "per_group": {name: iv.to_dict() for name, iv in self.per_group.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvalResult":
        try:
            return cls(
                config=ClassifierConfig(**data["config"]),
                repeats=int(data["repeats"]),
                seeds=tuple(int(s) for s in data["seeds"]),
                overall=_interval_from_dict(data["overall"]),
                per_group={k: _interval_from_dict(v) for k, v in data["per_group"].items()},
            )
        except (KeyError, TypeError) as e:
            raise IngestionError(f"malformed evaluation result: {e}") from e


def _interval_from_dict(data: Mapping[str, Any]) -> Interval:
    return Interval(
        float(data["mean"]),
        float(data["half_width"]),
        tuple(float(v) for v in data.get("values", [])),
    )


@dataclass(frozen=True)
class _RepeatOutcome:
    index: int
    seed: int
    overall: float
    per_group: dict[str, float]


def _run_repeat(
    index: int,
    seed: int,
    train_table: DatasetTable,
    test_table: DatasetTable,
    config: ClassifierConfig,
    groups: Sequence[GroupPredicate],
    validation: DatasetTable | None,
) -> _RepeatOutcome:
    try:
        clf = train_classifier(train_table, replace(config, seed=seed), validation)
    except FairGenError as e:
        raise TrainingError(f"repeat {index} (seed {seed}): {e}") from e
    scores = predict_proba(clf, test_table)
    labels = test_table.label_indicator()
    per_group = {}
    for group in groups:
        mask = test_table.group_mask(group)
        per_group[str(group)] = accuracy_from_scores(scores[mask], labels[mask])
    overall = accuracy_from_scores(scores, labels)
    logger.debug(f"Repeat {index} (seed {seed}): accuracy {overall:.4f}")
    return _RepeatOutcome(index, seed, overall, per_group)


def evaluate_ci(
    train_table: DatasetTable,
    test_table: DatasetTable,
    config: ClassifierConfig,
    repeats: int = 10,
    groups: Sequence[GroupPredicate] = (),
    validation: DatasetTable | None = None,
    workers: int = 1,
    vary_seed: bool = True,
) -> EvalResult:
    """Train `repeats` classifiers with seeds seed+0..seed+r-1 and aggregate.

    Groups with no test rows are skipped with a warning. `vary_seed=False`
    reuses `config.seed` for every repeat.
    """
    if repeats < 2:
        raise ParameterError(f"repeats must be >= 2, got {repeats}")
    if len(test_table) == 0:
        raise ParameterError("test table is empty")

    scored_groups = []
    for group in dict.fromkeys(groups):
        if test_table.group_count(group) == 0:
            logger.warning(f"Group {group} has no test rows, skipping")
        else:
            scored_groups.append(group)

    seeds = [config.seed + r if vary_seed else config.seed for r in range(repeats)]
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [
            pool.submit(
                _run_repeat, r, seeds[r], train_table, test_table, config, scored_groups, validation
            )
            for r in range(repeats)
        ]
        outcomes = {o.index: o for o in (f.result() for f in futures)}

    ordered = [outcomes[r] for r in range(repeats)]
    result = EvalResult(
        config=config,
        repeats=repeats,
        seeds=tuple(seeds),
        overall=Interval.of([o.overall for o in ordered]),
        per_group={
            str(g): Interval.of([o.per_group[str(g)] for o in ordered]) for g in scored_groups
        },
    )
    logger.info(
        f"{config.hidden_units} HUs: accuracy {result.overall.mean:.4f} "
        f"± {result.overall.half_width:.4f} over {repeats} repeats"
    )
    return result


def sweep_hidden_units(
    train_table: DatasetTable,
    test_table: DatasetTable,
    config: ClassifierConfig,
    repeats: int = 10,
    hidden_units: Sequence[int] = HIDDEN_UNIT_SWEEP,
    groups: Sequence[GroupPredicate] = (),
    validation: DatasetTable | None = None,
    workers: int = 1,
) -> list[EvalResult]:
    return [
        evaluate_ci(
            train_table,
            test_table,
            replace(config, hidden_units=h),
            repeats,
            groups,
            validation,
            workers,
        )
        for h in hidden_units
    ]


# ============ Comparison tables ============


def format_cell(interval: Interval) -> str:
    return f"{100 * interval.mean:.2f} ± {100 * interval.half_width:.2f}"


def comparison_table(
    rows: Mapping[str, Sequence[EvalResult]], group: str | None = None
) -> pd.DataFrame:
    """Configurations as rows, hidden-unit counts as columns, "mean ± hw" cells.

    With `group`, cells show that group's accuracy instead of the overall one.
    """
    columns: list[int] = []
    for results in rows.values():
        for result in results:
            if result.hidden_units not in columns:
                columns.append(result.hidden_units)
    columns.sort()

    records = []
    for name, results in rows.items():
        by_units = {r.hidden_units: r for r in results}
        record: dict[str, str] = {"configuration": name}
        for h in columns:
            result = by_units.get(h)
            if result is None:
                cell = ""
            elif group is None:
                cell = format_cell(result.overall)
            elif group in result.per_group:
                cell = format_cell(result.per_group[group])
            else:
                raise ParameterError(f"group {group} missing from evaluation of {name}")
            record[f"Acc. ({h} HUs)"] = cell
        records.append(record)
    header = ["configuration"] + [f"Acc. ({h} HUs)" for h in columns]
    return pd.DataFrame.from_records(records, columns=header)


def comparison_csv_text(table: pd.DataFrame) -> str:
    return table.to_csv(index=False, lineterminator="\n")
