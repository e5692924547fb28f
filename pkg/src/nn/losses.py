"""Loss functions returning (value, gradient w.r.t. predictions)."""

import numpy as np
from numpy.typing import NDArray

from src.exceptions import ParameterError, ShapeError

# Probabilities are kept inside [PROB_EPS, 1 - PROB_EPS] before any log.
PROB_EPS = 1e-7


def clamp_probability(p: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.clip(p, PROB_EPS, 1.0 - PROB_EPS)


def bce_loss(
    pred: NDArray[np.float64],
    target: NDArray[np.float64],
) -> tuple[float, NDArray[np.float64]]:
    """Mean binary cross-entropy and its gradient w.r.t. `pred`."""
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.size == 0:
        raise ParameterError("bce_loss needs at least one prediction")
    if pred.shape != target.shape:
        raise ShapeError(f"prediction shape {pred.shape} != target shape {target.shape}")

    p = clamp_probability(pred)
    n = p.size
    loss = -float(np.mean(target * np.log(p) + (1.0 - target) * np.log(1.0 - p)))
    grad = (p - target) / (p * (1.0 - p)) / n
    return loss, grad
