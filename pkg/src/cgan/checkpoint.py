"""GAN checkpoint bundles and training-trace export."""

import json
from dataclasses import asdict
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from src.cgan.state import GanHyper, GanState, RoundRecord, TrainingMode, TrainingTrace
from src.dataset import Schema, TableEncoder
from src.exceptions import IngestionError
from src.nn import OptimizerState, model_from_dict, model_to_dict
from src.utils.artifacts import atomic_write_text, dump_json

FORMAT_VERSION = 1


class GanCheckpoint(BaseModel):
    """Two model checkpoints plus what is needed to condition and decode."""

    format_version: int = FORMAT_VERSION
    schema_hash: str
    seed: int
    mode: TrainingMode | None
    hyper: dict[str, Any]
    condition_map: dict[str, list[str]]
    feature_encoder: dict[str, Any]
    sigma: float | None
    gen: dict[str, Any]
    dis: dict[str, Any]
    trace: list[dict[str, float]] | None
    meta: dict[str, Any] = {}


def gan_to_dict(state: GanState, meta: dict[str, Any] | None = None) -> dict[str, Any]:
    schema = state.feature_encoder.schema
    checkpoint = GanCheckpoint(
        schema_hash=schema.fingerprint(),
        seed=state.seed,
        mode=state.mode,
        hyper=state.hyper.to_dict(),
        condition_map={
            col: list(schema.column(col).values or []) for col in state.condition_columns
        },
        feature_encoder=state.feature_encoder.to_dict(),
        sigma=state.sigma,
        gen=model_to_dict(state.gen),
        dis=model_to_dict(state.dis),
        trace=None if state.trace is None else [asdict(r) for r in state.trace.records],
        meta=meta or {},
    )
    return checkpoint.model_dump(mode="json")


def gan_from_dict(data: dict[str, Any], schema: Schema) -> GanState:
    checkpoint = GanCheckpoint.model_validate(data)
    if checkpoint.format_version != FORMAT_VERSION:
        raise IngestionError(f"unsupported GAN checkpoint version {checkpoint.format_version}")
    if checkpoint.schema_hash != schema.fingerprint():
        raise IngestionError("GAN checkpoint was trained with a different schema")
    for col, values in checkpoint.condition_map.items():
        if list(schema.column(col).values or []) != values:
            raise IngestionError(f"condition column {col!r} changed its declared values")

    hyper = GanHyper(**checkpoint.hyper)
    trace = None
    if checkpoint.trace is not None:
        trace = TrainingTrace(
            [RoundRecord(**{**r, "round": int(r["round"])}) for r in checkpoint.trace]
        )
    condition_encoder = TableEncoder(schema, tuple(checkpoint.condition_map), {})
    return GanState(
        gen=model_from_dict(checkpoint.gen),
        dis=model_from_dict(checkpoint.dis),
        hyper=hyper,
        feature_encoder=TableEncoder.from_dict(schema, checkpoint.feature_encoder),
        condition_encoder=condition_encoder,
        gen_opt=OptimizerState.adam(hyper.gen_lr, hyper.adam_beta1, hyper.adam_beta2),
        dis_opt=OptimizerState.adam(hyper.dis_lr, hyper.adam_beta1, hyper.adam_beta2),
        sigma=checkpoint.sigma,
        trace=trace,
        mode=checkpoint.mode,
        seed=checkpoint.seed,
    )


def save_gan(path: str | Path, state: GanState, meta: dict[str, Any] | None = None) -> Path:
    return atomic_write_text(path, dump_json(gan_to_dict(state, meta)))


def load_gan(path: str | Path, schema: Schema) -> GanState:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise IngestionError(f"cannot read GAN checkpoint {path}: {e}") from e
    return gan_from_dict(data, schema)


def trace_csv_text(trace: TrainingTrace, digits: int = 10) -> str:
    frame = trace.to_frame()
    frame["round"] = frame["round"].astype(np.int64)
    return frame.to_csv(index=False, lineterminator="\n", float_format=f"%.{digits}f")


def write_trace_csv(trace: TrainingTrace, path: str | Path, digits: int = 10) -> Path:
    return atomic_write_text(path, trace_csv_text(trace, digits))
