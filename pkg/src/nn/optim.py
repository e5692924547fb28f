"""SGD (with momentum) and Adam updates that can ascend or descend."""

import enum
from dataclasses import dataclass, field

import numpy as np

from src.exceptions import ParameterError, ShapeError
from src.nn.mlp import Gradients, MlpModel


class OptimizerKind(enum.Enum):
    SGD = "sgd"
    ADAM = "adam"


@dataclass
class OptimizerState:
    """Optimizer hyper-parameters and per-parameter accumulators."""

    kind: OptimizerKind
    learning_rate: float
    momentum: float = 0.0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.learning_rate >= 0:
            raise ParameterError(f"learning rate must be >= 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ParameterError(f"momentum must be in [0, 1), got {self.momentum}")

    @classmethod
    def sgd(cls, learning_rate: float = 0.01, momentum: float = 0.9) -> "OptimizerState":
        return cls(OptimizerKind.SGD, learning_rate, momentum=momentum)

    @classmethod
    def adam(
        cls,
        learning_rate: float = 1e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
    ) -> "OptimizerState":
        return cls(OptimizerKind.ADAM, learning_rate, beta1=beta1, beta2=beta2)


def optimizer_step(
    opt: OptimizerState,
    model: MlpModel,
    grads: Gradients,
    ascend: bool = False,
) -> MlpModel:
    """Move the parameters along -gradient (or +gradient when `ascend`).

    Accumulators in `opt` are updated in place; a new model is returned.
    """
    params = model.parameters()
    grad_list = grads.as_list()
    if len(grad_list) != len(params):
        raise ShapeError(f"{len(grad_list)} gradients for {len(params)} parameters")
    for i, (p, g) in enumerate(zip(params, grad_list, strict=True)):
        if p.shape != g.shape:
            raise ShapeError(f"gradient {i} has shape {g.shape}, parameter has {p.shape}")

    if not opt.first_moment:
        opt.first_moment = [np.zeros_like(p) for p in params]
        if opt.kind is OptimizerKind.ADAM:
            opt.second_moment = [np.zeros_like(p) for p in params]
    opt.step_count += 1
    sign = 1.0 if ascend else -1.0

    updated = []
    if opt.kind is OptimizerKind.SGD:
        for i, (p, g) in enumerate(zip(params, grad_list, strict=True)):
            opt.first_moment[i] = opt.momentum * opt.first_moment[i] + g
            updated.append(p + sign * (opt.learning_rate * opt.first_moment[i]))
    else:
        t = opt.step_count
        for i, (p, g) in enumerate(zip(params, grad_list, strict=True)):
            opt.first_moment[i] = opt.beta1 * opt.first_moment[i] + (1.0 - opt.beta1) * g
            opt.second_moment[i] = opt.beta2 * opt.second_moment[i] + (1.0 - opt.beta2) * g * g
            m_hat = opt.first_moment[i] / (1.0 - opt.beta1**t)
            v_hat = opt.second_moment[i] / (1.0 - opt.beta2**t)
            step = opt.learning_rate * m_hat / (np.sqrt(v_hat) + opt.eps)
            updated.append(p + sign * step)
    return model.with_parameters(updated)
