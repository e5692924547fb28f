"""Neural network building blocks."""

from src.nn.checkpoint import load_model, model_from_dict, model_to_dict, save_model
from src.nn.heads import HeadKind, MixedTabularHead, gumbel_softmax
from src.nn.losses import PROB_EPS, bce_loss, clamp_probability
from src.nn.mlp import (
    DEFAULT_HIDDEN_LAYERS,
    ForwardCache,
    Gradients,
    MlpModel,
    backward,
    forward,
    hidden_layers,
    init_mlp,
)
from src.nn.optim import OptimizerKind, OptimizerState, optimizer_step

__all__ = [
    "DEFAULT_HIDDEN_LAYERS",
    "PROB_EPS",
    "ForwardCache",
    "Gradients",
    "HeadKind",
    "MixedTabularHead",
    "MlpModel",
    "OptimizerKind",
    "OptimizerState",
    "backward",
    "bce_loss",
    "clamp_probability",
    "forward",
    "gumbel_softmax",
    "hidden_layers",
    "init_mlp",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "optimizer_step",
    "save_model",
]
