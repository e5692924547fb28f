"""Output heads, including the mixed numeric / Gumbel-Softmax tabular head."""

import enum
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from src.exceptions import ParameterError, ShapeError
from src.numerics import Matrix, SeededRng, sample_gumbel


class HeadKind(enum.Enum):
    """Activation applied to the last dense layer."""

    SIGMOID = "sigmoid"
    SOFTMAX = "softmax"
    LINEAR = "linear"
    MIXED_TABULAR = "mixed_tabular"


@dataclass(frozen=True)
class MixedTabularHead:
    """Sigmoid-squashed numeric outputs followed by one Gumbel-Softmax block per
    categorical column.

    The last dense layer of the generator is the concatenation of one dense
    layer per categorical column, so a single weight matrix covers all blocks.
    """

    numeric_width: int
    categorical_blocks: tuple[tuple[str, int], ...]
    temperature: float = 0.5

    def __post_init__(self) -> None:
        if self.numeric_width < 0:
            raise ParameterError(f"numeric_width must be >= 0, got {self.numeric_width}")
        if not self.temperature > 0:
            raise ParameterError(f"temperature must be positive, got {self.temperature}")
        for name, cardinality in self.categorical_blocks:
            if cardinality < 1:
                raise ParameterError(f"block {name!r} has cardinality {cardinality}")

    @property
    def width(self) -> int:
        return self.numeric_width + self.categorical_width

    @property
    def categorical_width(self) -> int:
        return sum(cardinality for _, cardinality in self.categorical_blocks)

    def block_slices(self) -> list[slice]:
        """Column slices of each categorical block in the head output."""
        slices = []
        start = self.numeric_width
        for _, cardinality in self.categorical_blocks:
            slices.append(slice(start, start + cardinality))
            start += cardinality
        return slices


def sigmoid(x: Matrix) -> Matrix:
    # Split by sign so exp never overflows.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax_rows(x: Matrix) -> Matrix:
    shifted = x - np.max(x, axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / np.sum(ex, axis=1, keepdims=True)


def gumbel_softmax(
    logits: NDArray[np.float64],
    temperature: float,
    rng: SeededRng | None = None,
    noise: NDArray[np.float64] | None = None,
) -> NDArray[np.float64]:
    """softmax((logits + g) / temperature) for one logit vector.

    `g` is drawn from `rng` unless an explicit `noise` vector is given.
    """
    if not temperature > 0:
        raise ParameterError(f"temperature must be positive, got {temperature}")
    logits = np.asarray(logits, dtype=np.float64)
    if noise is None:
        if rng is None:
            raise ParameterError("gumbel_softmax needs either rng or noise")
        noise = sample_gumbel(rng, logits.shape[0])
    if noise.shape != logits.shape:
        raise ShapeError(f"noise shape {noise.shape} does not match logits {logits.shape}")
    return softmax_rows(((logits + noise) / temperature).reshape(1, -1))[0]


def sample_head_noise(head: MixedTabularHead, rows: int, rng: SeededRng) -> Matrix:
    """Gumbel noise for every categorical block of `rows` outputs."""
    if head.categorical_width == 0 or rows == 0:
        return np.zeros((rows, head.categorical_width))
    return sample_gumbel(rng, (rows, head.categorical_width))


def apply_head(
    kind: HeadKind,
    logits: Matrix,
    mixed: MixedTabularHead | None = None,
    noise: Matrix | None = None,
) -> Matrix:
    if kind is HeadKind.SIGMOID:
        return sigmoid(logits)
    if kind is HeadKind.SOFTMAX:
        return softmax_rows(logits)
    if kind is HeadKind.LINEAR:
        return logits.copy()

    assert mixed is not None
    if noise is None:
        noise = np.zeros((logits.shape[0], mixed.categorical_width))
    out = np.empty_like(logits)
    nw = mixed.numeric_width
    out[:, :nw] = sigmoid(logits[:, :nw])
    for block in mixed.block_slices():
        shifted = block.start - nw, block.stop - nw
        perturbed = logits[:, block] + noise[:, shifted[0] : shifted[1]]
        out[:, block] = softmax_rows(perturbed / mixed.temperature)
    return out


def head_backward(
    kind: HeadKind,
    output: Matrix,
    grad_output: Matrix,
    mixed: MixedTabularHead | None = None,
) -> Matrix:
    """Gradient w.r.t. the head's logits given the gradient w.r.t. its output."""
    if kind is HeadKind.SIGMOID:
        return grad_output * output * (1.0 - output)
    if kind is HeadKind.SOFTMAX:
        inner = np.sum(grad_output * output, axis=1, keepdims=True)
        return output * (grad_output - inner)
    if kind is HeadKind.LINEAR:
        return grad_output.copy()

    assert mixed is not None
    grad = np.empty_like(grad_output)
    nw = mixed.numeric_width
    y = output[:, :nw]
    grad[:, :nw] = grad_output[:, :nw] * y * (1.0 - y)
    for block in mixed.block_slices():
        yb = output[:, block]
        gb = grad_output[:, block]
        inner = np.sum(gb * yb, axis=1, keepdims=True)
        grad[:, block] = yb * (gb - inner) / mixed.temperature
    return grad
