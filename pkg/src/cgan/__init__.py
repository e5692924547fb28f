"""Conditional GAN trained with the primal-dual subgradient method."""

from src.cgan.checkpoint import load_gan, save_gan, trace_csv_text, write_trace_csv
from src.cgan.kernel import (
    dual_update,
    estimate_pgen,
    gaussian_kernel,
    kernel_matrix,
    median_bandwidth,
)
from src.cgan.sampler import generate
from src.cgan.state import (
    GanHyper,
    GanState,
    NoiseBatch,
    RoundRecord,
    TrainingMode,
    TrainingTrace,
    init_gan,
)
from src.cgan.trainer import (
    dis_objective,
    dis_step,
    gen_objective,
    gen_step,
    train,
    update_dual,
)

__all__ = [
    "GanHyper",
    "GanState",
    "NoiseBatch",
    "RoundRecord",
    "TrainingMode",
    "TrainingTrace",
    "dis_objective",
    "dis_step",
    "dual_update",
    "estimate_pgen",
    "gaussian_kernel",
    "gen_objective",
    "gen_step",
    "generate",
    "init_gan",
    "kernel_matrix",
    "load_gan",
    "median_bandwidth",
    "save_gan",
    "train",
    "trace_csv_text",
    "update_dual",
]
