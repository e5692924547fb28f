"""Synthetic row generation for a targeted population group."""

import logging

import numpy as np

from src.cgan.state import GanState
from src.cgan.trainer import generate_fake
from src.dataset import DatasetTable, GroupPredicate, Provenance
from src.exceptions import ParameterError, UsageError
from src.numerics import SeededRng

logger = logging.getLogger(__name__)


def generate(
    state: GanState,
    tpg: GroupPredicate,
    count: int,
    rng: SeededRng,
) -> DatasetTable:
    """Draw `count` synthetic rows for `tpg`.

    Sensitive condition columns are stamped from the group, so every row
    satisfies the predicate; the rest is decoded from the generator output
    (categoricals by argmax of their Gumbel-Softmax block).
    """
    if state.trace is None:
        raise UsageError("the GAN has not been trained yet")
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")

    condition = state.condition_vector(tpg)
    noise = state.sample_noise(count, rng)
    fake, _ = generate_fake(state, condition, noise)
    if not np.all(np.isfinite(fake)):
        raise UsageError("generator produced non-finite values")
    table = state.feature_encoder.decode(fake, fixed=tpg.as_dict(), provenance=Provenance.SYNTHETIC)
    logger.info(f"Generated {count} synthetic rows for {tpg}")
    return table
