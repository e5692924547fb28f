"""Run context shared by the subcommands: seed, settings and artifact writers."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click

from src.config import Settings, get_settings
from src.dataset import DatasetTable, GroupPredicate, Schema, write_csv
from src.numerics import SeededRng
from src.utils.artifacts import artifact_meta, atomic_write_text, dump_json, write_sidecar_meta

logger = logging.getLogger(__name__)

# Options that name files rather than configure the computation.
PATH_OPTIONS = frozenset(
    {"data", "schema", "out", "trace", "histograms", "plot", "classifier", "gan", "synthetic",
     "train", "test", "validation", "evaluation", "train_out", "test_out", "validation_out"}
)


@dataclass
class RunContext:
    """Everything a subcommand needs besides its own options."""

    settings: Settings
    seed: int
    config: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_click(cls, ctx: click.Context, seed: int | None) -> "RunContext":
        settings = get_settings()
        resolved = settings.resolve_seed(seed)
        config = {
            "command": ctx.info_name,
            **{k: _plain(v) for k, v in sorted(ctx.params.items()) if k not in PATH_OPTIONS},
        }
        config["seed"] = resolved
        logger.info(f"fairgen {ctx.info_name}: seed {resolved}")
        return cls(settings, resolved, config)

    @property
    def meta(self) -> dict[str, Any]:
        return artifact_meta(self.seed, self.config)

    def rng(self) -> SeededRng:
        return SeededRng(self.seed)

    def write_report(self, path: str | Path, payload: dict[str, Any]) -> Path:
        """JSON report with meta, reals rounded to the configured precision."""
        document = {"meta": self.meta, **payload}
        return atomic_write_text(path, dump_json(document, self.settings.float_digits))

    def attach_meta(self, written: Path) -> Path:
        """Give an artifact written elsewhere its `.meta.json` sidecar."""
        write_sidecar_meta(written, self.meta)
        return written

    def write_table(self, path: str | Path, table: DatasetTable) -> Path:
        return self.attach_meta(write_csv(table, path))

    def write_text(self, path: str | Path, text: str) -> Path:
        return self.attach_meta(atomic_write_text(path, text))


def _plain(value: Any) -> Any:
    if isinstance(value, tuple | list):
        return [_plain(v) for v in value]
    if isinstance(value, Path):
        return str(value)
    return value


def parse_groups(texts: tuple[str, ...], schema: Schema) -> list[GroupPredicate]:
    return [GroupPredicate.parse(text, schema) for text in texts]
