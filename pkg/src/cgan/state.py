"""GAN state, hyper-parameters and training trace."""

import enum
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from src.dataset import DatasetTable, GroupPredicate, TableEncoder, fit_encoder
from src.exceptions import ParameterError, UsageError
from src.nn import (
    HeadKind,
    MixedTabularHead,
    MlpModel,
    OptimizerState,
    hidden_layers,
    init_mlp,
)
from src.nn.heads import sample_head_noise
from src.numerics import Matrix, SeededRng, sample_gaussian


class TrainingMode(enum.Enum):
    PRIMAL_DUAL = "primal-dual"
    STANDARD_CGAN = "standard"


@dataclass(frozen=True)
class GanHyper:
    """Training knobs; `sigma=None` selects the median-distance bandwidth."""

    n1: int = 64
    n2: int = 64
    k_steps: int = 1
    beta: float = 0.1
    sigma: float | None = None
    epsilon_rounds: int = 2000
    noise_dim: int = 32
    hidden_units: int = 64
    gen_lr: float = 2e-3
    dis_lr: float = 2e-3
    adam_beta1: float = 0.5
    adam_beta2: float = 0.9
    temperature: float = 0.5
    normalized_kernel: bool = False
    log_every: int = 100

    def __post_init__(self) -> None:
        for name in ("n1", "n2", "k_steps", "noise_dim", "hidden_units", "log_every"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.epsilon_rounds < 0:
            raise ParameterError(f"epsilon_rounds must be >= 0, got {self.epsilon_rounds}")
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if self.sigma is not None and not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not self.temperature > 0:
            raise ParameterError(f"temperature must be positive, got {self.temperature}")
        if self.gen_lr < 0 or self.dis_lr < 0:
            raise ParameterError("learning rates must be >= 0")
        if not (0 <= self.adam_beta1 < 1 and 0 <= self.adam_beta2 < 1):
            raise ParameterError(
                f"Adam moments must lie in [0, 1), got {self.adam_beta1}, {self.adam_beta2}"
            )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RoundRecord:
    round: int
    dis_loss: float
    gen_loss: float
    mean_dis_real: float
    mean_dis_fake: float


@dataclass
class TrainingTrace:
    records: list[RoundRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def to_frame(self) -> pd.DataFrame:
        columns = ["round", "dis_loss", "gen_loss", "mean_dis_real", "mean_dis_fake"]
        return pd.DataFrame([asdict(r) for r in self.records], columns=columns)


@dataclass(frozen=True)
class NoiseBatch:
    """Latent draws z plus the Gumbel noise of the generator's categorical blocks."""

    z: Matrix
    gumbel: Matrix

    def __len__(self) -> int:
        return self.z.shape[0]


@dataclass(frozen=True, eq=False)
class GanState:
    """Generator, discriminator, dual variables and everything needed to decode."""

    gen: MlpModel
    dis: MlpModel
    hyper: GanHyper
    feature_encoder: TableEncoder
    condition_encoder: TableEncoder
    gen_opt: OptimizerState
    dis_opt: OptimizerState
    sigma: float | None = None
    dual: np.ndarray | None = None
    trace: TrainingTrace | None = None
    mode: TrainingMode | None = None
    seed: int = 0

    @property
    def condition_columns(self) -> tuple[str, ...]:
        return self.condition_encoder.columns

    @property
    def condition_width(self) -> int:
        return self.condition_encoder.width

    @property
    def feature_width(self) -> int:
        return self.feature_encoder.width

    def condition_vector(self, group: GroupPredicate) -> np.ndarray:
        """One-hot condition for a targeted group over the condition columns."""
        if group.columns != self.condition_columns:
            raise UsageError(
                f"group {group} must constrain exactly the condition columns "
                f"{list(self.condition_columns)}"
            )
        frame = pd.DataFrame({col: [value] for col, value in group.terms})
        return self.condition_encoder.encode_frame(frame)[0]

    def sample_noise(self, rows: int, rng: SeededRng) -> NoiseBatch:
        assert self.gen.mixed_head is not None
        z = sample_gaussian(rng, rows, self.hyper.noise_dim)
        gumbel = sample_head_noise(self.gen.mixed_head, rows, rng)
        return NoiseBatch(z=z, gumbel=gumbel)


def check_targets(targets: Sequence[GroupPredicate]) -> tuple[str, ...]:
    """All targets must constrain the same non-empty set of sensitive columns."""
    if not targets:
        raise ParameterError("at least one targeted group is required")
    columns = targets[0].columns
    if not columns:
        raise ParameterError("a targeted group needs at least one sensitive term")
    for target in targets[1:]:
        if target.columns != columns:
            raise ParameterError(
                f"targeted groups must share condition columns: {targets[0]} vs {target}"
            )
    return columns


def init_gan(
    table: DatasetTable,
    targets: Sequence[GroupPredicate],
    hyper: GanHyper,
    rng: SeededRng,
) -> GanState:
    """Build a fresh generator/discriminator pair for the targets' condition columns.

    The generator emits every non-condition column (the label included); the
    condition columns are stamped from the targeted group at generation time.
    """
    condition_columns = check_targets(targets)
    features = [n for n in table.schema.names if n not in condition_columns]
    if not features:
        raise ParameterError("no columns left to generate after removing condition columns")
    feature_encoder = fit_encoder(table, features)
    condition_encoder = fit_encoder(table, list(condition_columns))

    head = MixedTabularHead(
        numeric_width=feature_encoder.numeric_width,
        categorical_blocks=feature_encoder.categorical_blocks,
        temperature=hyper.temperature,
    )
    hidden = hidden_layers(hyper.hidden_units)
    gen = init_mlp(
        hyper.noise_dim + condition_encoder.width,
        feature_encoder.width,
        hidden,
        HeadKind.MIXED_TABULAR,
        rng,
        mixed_head=head,
    )
    dis = init_mlp(
        feature_encoder.width + condition_encoder.width,
        1,
        hidden,
        HeadKind.SIGMOID,
        rng,
    )
    return GanState(
        gen=gen,
        dis=dis,
        hyper=hyper,
        feature_encoder=feature_encoder,
        condition_encoder=condition_encoder,
        gen_opt=OptimizerState.adam(hyper.gen_lr, hyper.adam_beta1, hyper.adam_beta2),
        dis_opt=OptimizerState.adam(hyper.dis_lr, hyper.adam_beta1, hyper.adam_beta2),
        sigma=hyper.sigma,
        seed=rng.seed,
    )
