"""Central finite-difference gradient oracle."""

from collections.abc import Callable

import numpy as np
from numpy.typing import NDArray


def numerical_gradient(
    objective: Callable[[], float],
    param: NDArray[np.float64],
    h: float = 1e-5,
) -> NDArray[np.float64]:
    """Perturb `param` in place entry by entry; `objective` must read it."""
    grad = np.zeros_like(param)
    for idx in np.ndindex(param.shape):
        original = param[idx]
        param[idx] = original + h
        plus = objective()
        param[idx] = original - h
        minus = objective()
        param[idx] = original
        grad[idx] = (plus - minus) / (2.0 * h)
    return grad


def max_relative_error(
    analytic: NDArray[np.float64],
    numeric: NDArray[np.float64],
    floor: float = 1e-8,
) -> float:
    """Largest |a - n| / max(|a|, |n|) over entries whose magnitude exceeds `floor`."""
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    mask = scale > floor
    if not np.any(mask):
        return 0.0
    return float(np.max(np.abs(analytic - numeric)[mask] / scale[mask]))
