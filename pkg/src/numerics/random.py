"""Seeded, platform-independent pseudo-randomness.

Every stream is drawn from numpy's Philox4x64 counter-based bit generator.
"""

from collections.abc import Sequence
from typing import Any

import numpy as np
from numpy.typing import NDArray

from src.exceptions import ParameterError
from src.numerics.linalg import Matrix

# Uniform draws feeding -log(-log(u)) stay inside [EPS_U, 1 - EPS_U].
EPS_U = 1e-12

ALGORITHM = "philox4x64"


class SeededRng:
    """Single-owner random stream keyed by a 64-bit seed."""

    def __init__(self, seed: int):
        if not 0 <= seed < 2**64:
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._generator = np.random.Generator(np.random.Philox(seed))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed}, algorithm={ALGORITHM})"

    def standard_normal(self, shape: tuple[int, ...]) -> NDArray[np.float64]:
        return self._generator.standard_normal(shape)

    def uniform(self, shape: tuple[int, ...]) -> NDArray[np.float64]:
        """Draws in [0, 1)."""
        return self._generator.random(shape)

    def integers(self, high: int, size: int) -> NDArray[np.int64]:
        return self._generator.integers(0, high, size=size, dtype=np.int64)

    def permutation(self, n: int) -> NDArray[np.int64]:
        return self._generator.permutation(n).astype(np.int64)

    def choice(self, population: Sequence[Any] | NDArray[Any], size: int) -> NDArray[Any]:
        """Sample `size` items without replacement."""
        return self._generator.choice(np.asarray(population), size=size, replace=False)


def sample_gaussian(
    rng: SeededRng,
    rows: int,
    cols: int,
    mean: float = 0.0,
    stddev: float = 1.0,
) -> Matrix:
    """I.i.d. normal draws shaped rows × cols."""
    if not stddev > 0:
        raise ParameterError(f"stddev must be positive, got {stddev}")
    if rows < 0 or cols < 0:
        raise ParameterError(f"invalid shape ({rows}, {cols})")
    return rng.standard_normal((rows, cols)) * stddev + mean


def sample_uniform(rng: SeededRng, shape: tuple[int, ...]) -> NDArray[np.float64]:
    """Uniform draws clamped to [EPS_U, 1 - EPS_U]."""
    return np.clip(rng.uniform(shape), EPS_U, 1.0 - EPS_U)


def sample_gumbel(rng: SeededRng, n: int | tuple[int, ...]) -> NDArray[np.float64]:
    """Standard Gumbel draws g = -log(-log(u))."""
    shape = (n,) if isinstance(n, int) else n
    if any(dim < 1 for dim in shape):
        raise ParameterError(f"gumbel sample size must be >= 1, got {n}")
    u = sample_uniform(rng, shape)
    return -np.log(-np.log(u))
