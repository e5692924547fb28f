"""Downstream MLP classifier: training, prediction and checkpoints."""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np

from src.dataset import DatasetTable, Schema, TableEncoder, fit_encoder
from src.exceptions import IngestionError, ParameterError, TrainingError
from src.nn import (
    HeadKind,
    MlpModel,
    OptimizerState,
    backward,
    bce_loss,
    forward,
    hidden_layers,
    init_mlp,
    model_from_dict,
    model_to_dict,
    optimizer_step,
)
from src.numerics import SeededRng
from src.utils.artifacts import atomic_write_text, dump_json

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
DECISION_THRESHOLD = 0.5


@dataclass(frozen=True)
class ClassifierConfig:
    """Hyper-parameters of one classifier training run."""

    hidden_units: int = 300
    epochs: int = 20
    learning_rate: float = 0.01
    momentum: float = 0.9
    batch_size: int = 64
    seed: int = 0
    patience: int = 10
    exclude_sensitive: bool = False

    def __post_init__(self) -> None:
        if self.hidden_units < 1:
            raise ParameterError(f"hidden_units must be >= 1, got {self.hidden_units}")
        if self.epochs < 0:
            raise ParameterError(f"epochs must be >= 0, got {self.epochs}")
        if self.batch_size < 1 or self.patience < 1:
            raise ParameterError("batch_size and patience must be >= 1")
        if not self.learning_rate >= 0:
            raise ParameterError(f"learning_rate must be >= 0, got {self.learning_rate}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class ClassifierModel:
    """A trained network together with the encoder that feeds it."""

    model: MlpModel
    encoder: TableEncoder
    config: ClassifierConfig

    @property
    def schema(self) -> Schema:
        return self.encoder.schema


def input_columns(schema: Schema, exclude_sensitive: bool = False) -> list[str]:
    return [
        c.name
        for c in schema.columns
        if not c.label and not (exclude_sensitive and c.sensitive)
    ]


def predict_proba(clf: ClassifierModel, table: DatasetTable) -> np.ndarray:
    """Predicted probability of the positive label for every row."""
    if clf.model.output_head is not HeadKind.SIGMOID:
        raise ParameterError("classifier output head must be a sigmoid")
    out, _ = forward(clf.model, clf.encoder.encode(table))
    return out[:, 0]


def accuracy_from_scores(scores: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of rows where (score >= 0.5) matches the 0/1 label."""
    if len(scores) == 0:
        raise ParameterError("accuracy needs at least one row")
    predicted = (scores >= DECISION_THRESHOLD).astype(np.float64)
    return float(np.mean(predicted == labels))


def accuracy(clf: ClassifierModel, table: DatasetTable) -> float:
    return accuracy_from_scores(predict_proba(clf, table), table.label_indicator())


def train_classifier(
    train_table: DatasetTable,
    config: ClassifierConfig,
    validation: DatasetTable | None = None,
) -> ClassifierModel:
    """Minibatch cross-entropy training of a 3-hidden-layer sigmoid MLP.

    With a validation table, training keeps the best-validation-accuracy
    weights and stops after `patience` epochs without improvement.
    """
    if len(train_table) == 0:
        raise ParameterError("training table is empty")
    columns = input_columns(train_table.schema, config.exclude_sensitive)
    encoder = fit_encoder(train_table, columns)
    x = encoder.encode(train_table)
    y = train_table.label_indicator()[:, np.newaxis]

    rng = SeededRng(config.seed)
    model = init_mlp(
        encoder.width, 1, hidden_layers(config.hidden_units), HeadKind.SIGMOID, rng
    )
    opt = OptimizerState.sgd(config.learning_rate, config.momentum)
    clf = ClassifierModel(model, encoder, config)

    best = clf
    best_accuracy = -1.0
    stale = 0
    n = x.shape[0]
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        for step, start in enumerate(range(0, n, config.batch_size)):
            batch = order[start : start + config.batch_size]
            pred, cache = forward(model, x[batch])
            loss, grad = bce_loss(pred, y[batch])
            if not np.isfinite(loss):
                raise TrainingError(f"classifier loss is NaN at epoch {epoch}, step {step}")
            model = optimizer_step(opt, model, backward(model, cache, grad))
        clf = ClassifierModel(model, encoder, config)

        if validation is None:
            continue
        val_accuracy = accuracy(clf, validation)
        logger.debug(f"Epoch {epoch}: validation accuracy {val_accuracy:.4f}")
        if val_accuracy > best_accuracy:
            best, best_accuracy, stale = clf, val_accuracy, 0
        else:
            stale += 1
            if stale >= config.patience:
                logger.info(f"Early stopping at epoch {epoch} (best {best_accuracy:.4f})")
                break

    return best if validation is not None and best_accuracy >= 0 else clf


def classifier_to_dict(clf: ClassifierModel, meta: dict[str, Any] | None = None) -> dict[str, Any]:
    return {
        "format_version": FORMAT_VERSION,
        "schema_hash": clf.schema.fingerprint(),
        "config": clf.config.to_dict(),
        "encoder": clf.encoder.to_dict(),
        "model": model_to_dict(clf.model),
        "meta": meta or {},
    }


def classifier_from_dict(data: dict[str, Any], schema: Schema) -> ClassifierModel:
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise IngestionError(f"unsupported classifier checkpoint version {version}")
    if data.get("schema_hash") != schema.fingerprint():
        raise IngestionError("classifier checkpoint was trained with a different schema")
    return ClassifierModel(
        model=model_from_dict(data["model"]),
        encoder=TableEncoder.from_dict(schema, data["encoder"]),
        config=ClassifierConfig(**data["config"]),
    )


def save_classifier(
    path: str | Path, clf: ClassifierModel, meta: dict[str, Any] | None = None
) -> Path:
    return atomic_write_text(path, dump_json(classifier_to_dict(clf, meta)))


def load_classifier(path: str | Path, schema: Schema) -> ClassifierModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise IngestionError(f"cannot read classifier checkpoint {path}: {e}") from e
    return classifier_from_dict(data, schema)
