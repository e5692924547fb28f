"""Atomic, reproducible artifact writing."""

import hashlib
import json
import logging
import math
import os
import tempfile
from collections.abc import Mapping
from pathlib import Path
from typing import Any

from src import __version__
from src.exceptions import IngestionError

logger = logging.getLogger(__name__)

META_SUFFIX = ".meta.json"


def config_hash(config: Mapping[str, Any]) -> str:
    """Stable short hash of a configuration mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def artifact_meta(seed: int, config: Mapping[str, Any]) -> dict[str, Any]:
    return {
        "tool_version": __version__,
        "seed": seed,
        "config_hash": config_hash(config),
    }


def round_reals(obj: Any, digits: int) -> Any:
    """Round every float in a JSON-like structure to `digits` decimals."""
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite real {obj}")
        return round(obj, digits) + 0.0  # normalizes -0.0
    if isinstance(obj, Mapping):
        return {key: round_reals(value, digits) for key, value in obj.items()}
    if isinstance(obj, list | tuple):
        return [round_reals(value, digits) for value in obj]
    return obj


def format_real(value: float) -> str:
    """Shortest round-trip text for a real, integral values without '.0'."""
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write via a temp file in the target directory, then rename over `path`."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    logger.info(f"Wrote {target}")
    return target


def dump_json(payload: Any, digits: int | None = None) -> str:
    """Deterministic JSON text; reals rounded when `digits` is given."""
    if digits is not None:
        payload = round_reals(payload, digits)
    return json.dumps(payload, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def atomic_write_json(path: str | Path, payload: Any, digits: int | None = None) -> Path:
    return atomic_write_text(path, dump_json(payload, digits))


def write_sidecar_meta(path: str | Path, meta: Mapping[str, Any]) -> Path:
    """Provenance for artifacts (CSV, SVG) that cannot embed it."""
    return atomic_write_json(Path(f"{path}{META_SUFFIX}"), dict(meta))


def read_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise IngestionError(f"cannot read JSON {path}: {e}") from e
