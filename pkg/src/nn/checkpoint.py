"""Versioned JSON checkpoints for MLP models."""

import json
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel, Field

from src.exceptions import IngestionError
from src.nn.heads import HeadKind, MixedTabularHead
from src.nn.mlp import MlpModel
from src.utils.artifacts import atomic_write_text, dump_json

FORMAT_VERSION = 1


class HeadDescriptor(BaseModel):
    """Output head tag plus the block layout of a mixed tabular head."""

    kind: HeadKind
    numeric_width: int | None = None
    categorical_blocks: list[tuple[str, int]] | None = None
    temperature: float | None = None


class ModelCheckpoint(BaseModel):
    """On-disk form of an MlpModel; reals keep full round-trip precision."""

    format_version: int = FORMAT_VERSION
    layer_dims: list[int]
    hidden_activation: str = "relu"
    output_head: HeadDescriptor
    weights: list[list[float]] = Field(description="row-major weight matrices")
    biases: list[list[float]]
    seed: int = 0


def to_checkpoint(model: MlpModel) -> ModelCheckpoint:
    head = HeadDescriptor(kind=model.output_head)
    if model.mixed_head is not None:
        head.numeric_width = model.mixed_head.numeric_width
        head.categorical_blocks = list(model.mixed_head.categorical_blocks)
        head.temperature = model.mixed_head.temperature
    return ModelCheckpoint(
        layer_dims=list(model.layer_dims),
        hidden_activation=model.hidden_activation,
        output_head=head,
        weights=[w.ravel(order="C").tolist() for w in model.weights],
        biases=[b.tolist() for b in model.biases],
        seed=model.seed,
    )


def from_checkpoint(checkpoint: ModelCheckpoint) -> MlpModel:
    if checkpoint.format_version != FORMAT_VERSION:
        raise IngestionError(
            f"unsupported model checkpoint version {checkpoint.format_version}"
        )
    dims = checkpoint.layer_dims
    mixed = None
    head = checkpoint.output_head
    if head.kind is HeadKind.MIXED_TABULAR:
        mixed = MixedTabularHead(
            numeric_width=head.numeric_width or 0,
            categorical_blocks=tuple(
                (name, int(card)) for name, card in head.categorical_blocks or []
            ),
            temperature=head.temperature if head.temperature is not None else 0.5,
        )
    weights = tuple(
        np.array(w, dtype=np.float64).reshape(dims[i], dims[i + 1])
        for i, w in enumerate(checkpoint.weights)
    )
    biases = tuple(np.array(b, dtype=np.float64) for b in checkpoint.biases)
    return MlpModel(
        layer_dims=tuple(dims),
        weights=weights,
        biases=biases,
        output_head=head.kind,
        mixed_head=mixed,
        hidden_activation=checkpoint.hidden_activation,
        seed=checkpoint.seed,
    )


def model_to_dict(model: MlpModel) -> dict[str, Any]:
    return to_checkpoint(model).model_dump(mode="json")


def model_from_dict(data: dict[str, Any]) -> MlpModel:
    return from_checkpoint(ModelCheckpoint.model_validate(data))


def save_model(path: str | Path, model: MlpModel) -> Path:
    # Stdlib json writes the shortest repr of each float, so reloading is bit-exact.
    return atomic_write_text(path, dump_json(model_to_dict(model)))


def load_model(path: str | Path) -> MlpModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IngestionError(f"cannot read model checkpoint {path}: {e}") from e
    return model_from_dict(json.loads(text))
