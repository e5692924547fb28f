"""Matrix helpers on top of numpy float64 arrays."""

from typing import Any, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

from src.exceptions import ParameterError, ShapeError

# Row-major (C-contiguous) 2-D float64 array.
Matrix: TypeAlias = NDArray[np.float64]


def as_matrix(data: ArrayLike, rows: int | None = None, cols: int | None = None) -> Matrix:
    """Coerce `data` into a C-contiguous 2-D float64 matrix.

    A flat sequence is reshaped with `rows`/`cols` when given, otherwise it
    becomes a single row.
    """
    arr = np.array(data, dtype=np.float64, order="C")
    if arr.ndim == 1:
        if rows is not None and cols is not None:
            if arr.size != rows * cols:
                raise ShapeError(
                    f"data length {arr.size} does not match shape ({rows}, {cols})"
                )
            arr = arr.reshape(rows, cols)
        else:
            arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got {arr.ndim} dimensions")
    return ensure_finite(arr)


def ensure_finite(arr: NDArray[Any], what: str = "matrix") -> NDArray[Any]:
    """Reject NaN/Inf entries."""
    if not np.all(np.isfinite(arr)):
        raise ParameterError(f"{what} contains non-finite entries")
    return arr


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Standard matrix product a·b."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return np.ascontiguousarray(a @ b, dtype=np.float64)
