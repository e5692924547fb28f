"""Splitting and augmentation of dataset tables."""

import logging
import math
from collections.abc import Sequence

import numpy as np

from src.dataset.schema import AugmentationPlan
from src.dataset.table import DatasetTable, Provenance
from src.exceptions import AugmentationError, ParameterError
from src.numerics import SeededRng

logger = logging.getLogger(__name__)


def _apportion(n: int, fractions: Sequence[float]) -> np.ndarray:
    """Part index for each of n positions: at every step the part furthest
    behind its quota gets the next position (ties go to the earlier part)."""
    counts = np.zeros(len(fractions))
    quotas = np.asarray(fractions, dtype=np.float64)
    parts = np.empty(n, dtype=np.int64)
    for i in range(n):
        k = int(np.argmax(quotas * (i + 1) - counts))
        parts[i] = k
        counts[k] += 1
    return parts


def split(
    table: DatasetTable,
    fractions: Sequence[float],
    rng: SeededRng,
) -> tuple[DatasetTable, ...]:
    """Seeded, label-stratified partition into len(fractions) disjoint parts."""
    if len(fractions) < 2:
        raise ParameterError("split needs at least two fractions")
    if any(not f > 0 for f in fractions):
        raise ParameterError(f"split fractions must be positive, got {list(fractions)}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ParameterError(f"split fractions must sum to 1, got {sum(fractions)}")

    label = table.frame[table.schema.label_column.name].to_numpy()
    ordered = []
    for value in table.schema.label_column.values or []:
        stratum = np.flatnonzero(label == value)
        ordered.append(stratum[rng.permutation(len(stratum))])
    order = np.concatenate(ordered)
    parts = _apportion(len(order), fractions)

    result = []
    for k in range(len(fractions)):
        indices = np.sort(order[parts == k])
        if len(indices) == 0:
            raise ParameterError(f"split part {k} would be empty ({len(table)} rows)")
        result.append(table.take(indices))
    return tuple(result)


def augmentation_count(fraction: float, group_size: int) -> int:
    """round(fraction · group_size), halves rounding up."""
    return int(math.floor(fraction * group_size + 0.5))


def augment(
    table: DatasetTable,
    synthetic: DatasetTable,
    plan: AugmentationPlan,
) -> DatasetTable:
    """Append synthetic rows per plan entry; original rows are never touched.

    Each entry takes round(fraction · N_g) rows matching its group, where N_g
    counts the group's original rows in `table`. Pool rows are consumed in
    order and never reused across entries.
    """
    if synthetic.schema.fingerprint() != table.schema.fingerprint():
        raise ParameterError("synthetic pool schema differs from the table schema")
    if np.any(synthetic.provenance != Provenance.SYNTHETIC.value):
        raise ParameterError("synthetic pool contains rows not tagged synthetic")

    used = np.zeros(len(synthetic), dtype=bool)
    pieces = []
    for entry in plan.entries:
        group_size = table.group_count(entry.group, original_only=True)
        needed = augmentation_count(entry.fraction, group_size)
        if needed == 0:
            continue
        candidates = np.flatnonzero(synthetic.group_mask(entry.group) & ~used)
        if len(candidates) < needed:
            raise AugmentationError(
                f"group {entry.group}: need {needed} synthetic rows but the pool has "
                f"{len(candidates)} (short by {needed - len(candidates)})"
            )
        picked = candidates[:needed]
        used[picked] = True
        pieces.append(synthetic.take(picked))
        logger.info(
            f"Augmenting {entry.group}: {group_size} original rows + {needed} synthetic "
            f"({entry.fraction:.0%})"
        )
    return table.concat(*pieces)
