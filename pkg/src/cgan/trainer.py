"""Primal-dual subgradient training of the conditional GAN.

Each outer round: sample n1 real rows of the targeted group and n2 noise
vectors, take K ascent steps on the discriminator, estimate the generator
density at the real rows with a Gaussian KDE, move the dual variables, then
take one descent step on the generator through both its adversarial term and
the squared dual residual.
"""

import copy
import logging
from collections.abc import Sequence
from dataclasses import dataclass, replace

import numpy as np

from src.cgan.kernel import dual_update, estimate_pgen, median_bandwidth, pgen_gradient
from src.cgan.state import (
    GanState,
    NoiseBatch,
    RoundRecord,
    TrainingMode,
    TrainingTrace,
    check_targets,
)
from src.dataset import DatasetTable, GroupPredicate
from src.exceptions import ParameterError, ShapeError, TrainingError, UsageError
from src.nn import PROB_EPS, ForwardCache, Gradients, backward, forward, optimizer_step
from src.numerics import Matrix, SeededRng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepStats:
    objective: float
    mean_dis_real: float
    mean_dis_fake: float


def _with_condition(rows: Matrix, condition: np.ndarray) -> Matrix:
    return np.hstack([rows, np.tile(condition, (rows.shape[0], 1))])


def _clamped(d: Matrix) -> tuple[Matrix, Matrix]:
    """Clamp Dis outputs; the mask marks entries left untouched (gradient flows)."""
    inside = (d > PROB_EPS) & (d < 1.0 - PROB_EPS)
    return np.clip(d, PROB_EPS, 1.0 - PROB_EPS), inside


def _check_batch(state: GanState, real_batch: Matrix, condition: np.ndarray) -> None:
    if real_batch.ndim != 2 or real_batch.shape[0] == 0:
        raise ParameterError("real batch must be a non-empty matrix")
    if real_batch.shape[1] != state.feature_width:
        raise ShapeError(
            f"real batch width {real_batch.shape[1]} != feature width {state.feature_width}"
        )
    if condition.shape != (state.condition_width,):
        raise ShapeError(f"condition shape {condition.shape} != ({state.condition_width},)")


def _resolve_noise(
    state: GanState, rng: SeededRng | None, noise: NoiseBatch | None
) -> NoiseBatch:
    if noise is not None:
        return noise
    if rng is None:
        raise ParameterError("pass either rng or an explicit noise batch")
    return state.sample_noise(state.hyper.n2, rng)


def generate_fake(
    state: GanState, condition: np.ndarray, noise: NoiseBatch
) -> tuple[Matrix, ForwardCache]:
    gen_input = _with_condition(noise.z, condition)
    return forward(state.gen, gen_input, head_noise=noise.gumbel)


def _dis_gradients(
    state: GanState, real_batch: Matrix, condition: np.ndarray, noise: NoiseBatch
) -> tuple[StepStats, Gradients]:
    fake, _ = generate_fake(state, condition, noise)
    n1, n2 = real_batch.shape[0], fake.shape[0]

    d_real, cache_real = forward(state.dis, _with_condition(real_batch, condition))
    d_fake, cache_fake = forward(state.dis, _with_condition(fake, condition))
    real_c, real_in = _clamped(d_real)
    fake_c, fake_in = _clamped(d_fake)
    objective = float(np.mean(np.log(real_c)) + np.mean(np.log(1.0 - fake_c)))

    g_real = backward(state.dis, cache_real, np.where(real_in, 1.0 / real_c, 0.0) / n1)
    g_fake = backward(state.dis, cache_fake, np.where(fake_in, -1.0 / (1.0 - fake_c), 0.0) / n2)
    grads = Gradients(
        weights=[a + b for a, b in zip(g_real.weights, g_fake.weights, strict=True)],
        biases=[a + b for a, b in zip(g_real.biases, g_fake.biases, strict=True)],
    )
    stats = StepStats(objective, float(np.mean(d_real)), float(np.mean(d_fake)))
    return stats, grads


def dis_objective(
    state: GanState, real_batch: Matrix, condition: np.ndarray, noise: NoiseBatch
) -> float:
    """(1/n1) sum log Dis(x_i|c) + (1/n2) sum log(1 - Dis(Gen(z_j|c)|c))."""
    _check_batch(state, real_batch, condition)
    fake, _ = generate_fake(state, condition, noise)
    d_real, _ = forward(state.dis, _with_condition(real_batch, condition))
    d_fake, _ = forward(state.dis, _with_condition(fake, condition))
    real_c, _ = _clamped(d_real)
    fake_c, _ = _clamped(d_fake)
    return float(np.mean(np.log(real_c)) + np.mean(np.log(1.0 - fake_c)))


def dis_step(
    state: GanState,
    real_batch: Matrix,
    condition: np.ndarray,
    rng: SeededRng | None = None,
    noise: NoiseBatch | None = None,
) -> tuple[GanState, StepStats]:
    """One stochastic gradient ascent step of the discriminator objective."""
    _check_batch(state, real_batch, condition)
    noise = _resolve_noise(state, rng, noise)
    stats, grads = _dis_gradients(state, real_batch, condition, noise)
    dis_opt = copy.deepcopy(state.dis_opt)
    dis = optimizer_step(dis_opt, state.dis, grads, ascend=True)
    return replace(state, dis=dis, dis_opt=dis_opt), stats


def update_dual(
    state: GanState, real_batch: Matrix, condition: np.ndarray, noise: NoiseBatch
) -> GanState:
    """Estimate p_gen at the real rows and move the dual variables."""
    assert state.sigma is not None
    fake, _ = generate_fake(state, condition, noise)
    p_gen = estimate_pgen(real_batch, fake, state.sigma, state.hyper.normalized_kernel)
    d_real, _ = forward(state.dis, _with_condition(real_batch, condition))
    dual = dual_update(p_gen, d_real[:, 0], state.hyper.beta)
    return replace(state, dual=dual)


def _gen_gradients(
    state: GanState,
    real_batch: Matrix,
    condition: np.ndarray,
    noise: NoiseBatch,
    mode: TrainingMode,
) -> tuple[float, Gradients]:
    fake, cache_gen = generate_fake(state, condition, noise)
    n2 = fake.shape[0]

    d_fake, cache_dis = forward(state.dis, _with_condition(fake, condition))
    fake_c, fake_in = _clamped(d_fake)
    objective = float(np.mean(np.log(1.0 - fake_c)))
    grad_d = np.where(fake_in, -1.0 / (1.0 - fake_c), 0.0) / n2
    dis_grads = backward(state.dis, cache_dis, grad_d)
    assert dis_grads.inputs is not None
    grad_fake = dis_grads.inputs[:, : state.feature_width].copy()

    if mode is TrainingMode.PRIMAL_DUAL:
        assert state.sigma is not None and state.dual is not None
        normalized = state.hyper.normalized_kernel
        p_gen = estimate_pgen(real_batch, fake, state.sigma, normalized)
        residual = state.dual - p_gen
        objective += float(np.mean(residual * residual))
        grad_p = -2.0 * residual / real_batch.shape[0]
        grad_fake += pgen_gradient(real_batch, fake, state.sigma, grad_p, normalized)

    return objective, backward(state.gen, cache_gen, grad_fake)


def gen_objective(
    state: GanState,
    real_batch: Matrix,
    condition: np.ndarray,
    noise: NoiseBatch,
    mode: TrainingMode = TrainingMode.PRIMAL_DUAL,
) -> float:
    """(1/n2) sum log(1 - Dis(Gen(z_j|c)|c)) [+ (1/n1) sum (p~_i - p_gen_i)^2]."""
    _check_batch(state, real_batch, condition)
    _require_dual(state, real_batch, mode)
    fake, _ = generate_fake(state, condition, noise)
    d_fake, _ = forward(state.dis, _with_condition(fake, condition))
    fake_c, _ = _clamped(d_fake)
    objective = float(np.mean(np.log(1.0 - fake_c)))
    if mode is TrainingMode.PRIMAL_DUAL:
        assert state.sigma is not None and state.dual is not None
        p_gen = estimate_pgen(real_batch, fake, state.sigma, state.hyper.normalized_kernel)
        objective += float(np.mean((state.dual - p_gen) ** 2))
    return objective


def _require_dual(state: GanState, real_batch: Matrix, mode: TrainingMode) -> None:
    if mode is not TrainingMode.PRIMAL_DUAL:
        return
    if state.dual is None:
        raise UsageError("dual variables are not populated for this round")
    if state.dual.shape != (real_batch.shape[0],):
        raise UsageError(
            f"dual has {state.dual.shape[0]} entries but the real batch has {real_batch.shape[0]}"
        )
    if state.sigma is None:
        raise UsageError("kernel bandwidth is not set")


def gen_step(
    state: GanState,
    real_batch: Matrix,
    condition: np.ndarray,
    rng: SeededRng | None = None,
    noise: NoiseBatch | None = None,
    mode: TrainingMode = TrainingMode.PRIMAL_DUAL,
) -> tuple[GanState, float]:
    """One stochastic gradient descent step of the generator objective."""
    _check_batch(state, real_batch, condition)
    _require_dual(state, real_batch, mode)
    noise = _resolve_noise(state, rng, noise)
    objective, grads = _gen_gradients(state, real_batch, condition, noise, mode)
    gen_opt = copy.deepcopy(state.gen_opt)
    gen = optimizer_step(gen_opt, state.gen, grads, ascend=False)
    return replace(state, gen=gen, gen_opt=gen_opt), objective


def train(
    state: GanState,
    table: DatasetTable,
    targets: GroupPredicate | Sequence[GroupPredicate],
    rng: SeededRng,
    mode: TrainingMode = TrainingMode.PRIMAL_DUAL,
) -> tuple[GanState, TrainingTrace]:
    """Run `epsilon_rounds` outer rounds; each round visits every target once."""
    targets = [targets] if isinstance(targets, GroupPredicate) else list(targets)
    if check_targets(targets) != state.condition_columns:
        raise ParameterError(
            f"targets constrain {list(targets[0].columns)}, the GAN was built for "
            f"{list(state.condition_columns)}"
        )
    hyper = state.hyper

    pools = []
    for target in targets:
        rows = table.where(target)
        if len(rows) < hyper.n1:
            raise TrainingError(
                f"group {target} has {len(rows)} rows; training needs at least n1={hyper.n1}"
            )
        pools.append((target, state.feature_encoder.encode(rows), state.condition_vector(target)))

    trace = TrainingTrace()
    if hyper.epsilon_rounds == 0:
        return state, trace

    logger.info(
        f"Training cGAN ({mode.value}) on {', '.join(str(t) for t in targets)} "
        f"for {hyper.epsilon_rounds} rounds"
    )
    for round_index in range(hyper.epsilon_rounds):
        totals = np.zeros(4)
        for target, encoded, condition in pools:
            real = encoded[rng.choice(np.arange(encoded.shape[0]), hyper.n1)]
            noise = state.sample_noise(hyper.n2, rng)

            if state.sigma is None:
                state = replace(state, sigma=median_bandwidth(real))
                logger.info(f"Kernel bandwidth sigma = {state.sigma:.6g} (median heuristic)")

            for _ in range(hyper.k_steps):
                state, stats = dis_step(state, real, condition, noise=noise)
            if mode is TrainingMode.PRIMAL_DUAL:
                state = update_dual(state, real, condition, noise)
            state, gen_loss = gen_step(state, real, condition, noise=noise, mode=mode)

            totals += (-stats.objective, gen_loss, stats.mean_dis_real, stats.mean_dis_fake)

        record = RoundRecord(round_index, *(float(v) for v in totals / len(pools)))
        if not np.all(np.isfinite(totals)):
            raise TrainingError(f"GAN training diverged at round {round_index}")
        trace.records.append(record)
        logger.debug(f"Round {round_index}: {record}")
        if (round_index + 1) % hyper.log_every == 0:
            logger.info(
                f"Round {round_index + 1}/{hyper.epsilon_rounds}: dis_loss={record.dis_loss:.4f} "
                f"gen_loss={record.gen_loss:.4f} D(real)={record.mean_dis_real:.3f} "
                f"D(fake)={record.mean_dis_fake:.3f}"
            )

    previous = state.trace.records if state.trace is not None else []
    full = TrainingTrace([*previous, *trace.records])
    return replace(state, trace=full, mode=mode), trace
