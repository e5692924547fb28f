"""Multilayer perceptron with hand-written backpropagation."""

from dataclasses import dataclass, field

import numpy as np

from src.exceptions import ParameterError, ShapeError, UsageError
from src.nn.heads import (
    HeadKind,
    MixedTabularHead,
    apply_head,
    head_backward,
    sample_head_noise,
)
from src.numerics import Matrix, SeededRng, matmul

DEFAULT_HIDDEN_LAYERS = 3


def hidden_layers(units: int, depth: int = DEFAULT_HIDDEN_LAYERS) -> tuple[int, ...]:
    """Uniform hidden widths, three layers unless told otherwise."""
    if units < 1 or depth < 1:
        raise ParameterError(f"invalid hidden configuration: {depth} x {units}")
    return (units,) * depth


@dataclass(frozen=True, eq=False)
class MlpModel:
    """Dense ReLU network. Parameters are replaced, never reassigned, by training."""

    layer_dims: tuple[int, ...]
    weights: tuple[Matrix, ...]
    biases: tuple[np.ndarray, ...]
    output_head: HeadKind
    mixed_head: MixedTabularHead | None = None
    hidden_activation: str = "relu"
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.layer_dims) < 2:
            raise ShapeError(f"need at least input and output dims, got {self.layer_dims}")
        if len(self.weights) != len(self.layer_dims) - 1 or len(self.biases) != len(self.weights):
            raise ShapeError("weights/biases do not match layer_dims")
        for i, (w, b) in enumerate(zip(self.weights, self.biases, strict=True)):
            expected = (self.layer_dims[i], self.layer_dims[i + 1])
            if w.shape != expected:
                raise ShapeError(f"weights[{i}] has shape {w.shape}, expected {expected}")
            if b.shape != (self.layer_dims[i + 1],):
                raise ShapeError(f"biases[{i}] has shape {b.shape}, expected ({expected[1]},)")
        if self.hidden_activation != "relu":
            raise ParameterError(f"unsupported hidden activation {self.hidden_activation!r}")
        if self.output_head is HeadKind.MIXED_TABULAR:
            if self.mixed_head is None:
                raise ParameterError("mixed tabular head requires its block layout")
            if self.mixed_head.width != self.layer_dims[-1]:
                raise ShapeError(
                    f"head width {self.mixed_head.width} != output dim {self.layer_dims[-1]}"
                )

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    @property
    def output_dim(self) -> int:
        return self.layer_dims[-1]

    def parameters(self) -> list[np.ndarray]:
        """Flat [W0, b0, W1, b1, ...] view (the arrays themselves, not copies)."""
        params: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases, strict=True):
            params.extend((w, b))
        return params

    def with_parameters(self, params: list[np.ndarray]) -> "MlpModel":
        return MlpModel(
            layer_dims=self.layer_dims,
            weights=tuple(params[0::2]),
            biases=tuple(params[1::2]),
            output_head=self.output_head,
            mixed_head=self.mixed_head,
            hidden_activation=self.hidden_activation,
            seed=self.seed,
        )

    def copy(self) -> "MlpModel":
        return self.with_parameters([p.copy() for p in self.parameters()])


@dataclass
class Gradients:
    """Parameter gradients mirroring an MlpModel, plus the gradient w.r.t. its input."""

    weights: list[Matrix]
    biases: list[np.ndarray]
    inputs: Matrix | None = None

    def as_list(self) -> list[np.ndarray]:
        grads: list[np.ndarray] = []
        for w, b in zip(self.weights, self.biases, strict=True):
            grads.extend((w, b))
        return grads

    def scaled(self, factor: float) -> "Gradients":
        return Gradients(
            weights=[w * factor for w in self.weights],
            biases=[b * factor for b in self.biases],
            inputs=None if self.inputs is None else self.inputs * factor,
        )


@dataclass
class ForwardCache:
    """Intermediates of one forward pass, bound to the model that produced them."""

    model: MlpModel
    activations: list[Matrix] = field(default_factory=list)
    pre_activations: list[Matrix] = field(default_factory=list)
    output: Matrix | None = None
    head_noise: Matrix | None = None


def init_mlp(
    input_dim: int,
    output_dim: int,
    hidden: tuple[int, ...],
    output_head: HeadKind,
    rng: SeededRng,
    mixed_head: MixedTabularHead | None = None,
) -> MlpModel:
    """Fan-in scaled uniform weights and biases, both U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    dims = (input_dim, *hidden, output_dim)
    if any(d < 1 for d in dims):
        raise ParameterError(f"layer dims must be positive, got {dims}")
    weights = []
    biases = []
    for fan_in, fan_out in zip(dims[:-1], dims[1:], strict=True):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append((rng.uniform((fan_in, fan_out)) * 2.0 - 1.0) * bound)
        biases.append((rng.uniform((fan_out,)) * 2.0 - 1.0) * bound)
    return MlpModel(
        layer_dims=dims,
        weights=tuple(weights),
        biases=tuple(biases),
        output_head=output_head,
        mixed_head=mixed_head,
        seed=rng.seed,
    )


def forward(
    model: MlpModel,
    batch: Matrix,
    rng: SeededRng | None = None,
    head_noise: Matrix | None = None,
) -> tuple[Matrix, ForwardCache]:
    """Evaluate the network on a batch of rows.

    For a mixed tabular head the Gumbel noise comes from `head_noise` when
    given, else from `rng`, else it is zero.
    """
    if batch.ndim != 2 or batch.shape[1] != model.input_dim:
        raise ShapeError(f"batch shape {batch.shape} does not fit input dim {model.input_dim}")

    cache = ForwardCache(model=model)
    a = batch
    last = len(model.weights) - 1
    for i, (w, b) in enumerate(zip(model.weights, model.biases, strict=True)):
        cache.activations.append(a)
        z = matmul(a, w) + b
        cache.pre_activations.append(z)
        if i < last:
            a = np.maximum(z, 0.0)

    if model.output_head is HeadKind.MIXED_TABULAR:
        assert model.mixed_head is not None
        if head_noise is None:
            if rng is not None:
                head_noise = sample_head_noise(model.mixed_head, batch.shape[0], rng)
            else:
                head_noise = np.zeros((batch.shape[0], model.mixed_head.categorical_width))
        elif head_noise.shape != (batch.shape[0], model.mixed_head.categorical_width):
            raise ShapeError(f"head noise shape {head_noise.shape} does not fit the batch")
    cache.head_noise = head_noise

    output = apply_head(model.output_head, z, model.mixed_head, head_noise)
    cache.output = output
    return output, cache


def backward(model: MlpModel, cache: ForwardCache, loss_grad: Matrix) -> Gradients:
    """Backpropagate d(loss)/d(output) to every parameter and to the input."""
    if cache.model is not model or cache.output is None:
        raise UsageError("forward cache was not produced by this model")
    if loss_grad.shape != cache.output.shape:
        raise ShapeError(f"loss gradient {loss_grad.shape} != output {cache.output.shape}")

    n_layers = len(model.weights)
    grad_w: list[Matrix] = [np.empty(0)] * n_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * n_layers

    delta = head_backward(model.output_head, cache.output, loss_grad, model.mixed_head)
    for i in reversed(range(n_layers)):
        grad_w[i] = matmul(cache.activations[i].T, delta)
        grad_b[i] = np.sum(delta, axis=0)
        upstream = matmul(delta, model.weights[i].T)
        if i > 0:
            delta = upstream * (cache.pre_activations[i - 1] > 0.0)
    return Gradients(weights=grad_w, biases=grad_b, inputs=upstream)
