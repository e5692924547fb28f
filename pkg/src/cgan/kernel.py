"""Gaussian kernel density estimate of the generator and the dual update."""

import logging

import numpy as np
from numpy.typing import NDArray

from src.exceptions import ParameterError, ShapeError
from src.nn.losses import clamp_probability
from src.numerics import Matrix

logger = logging.getLogger(__name__)


def gaussian_kernel(u: NDArray[np.float64], sigma: float) -> float:
    """Unnormalized k_sigma(u) = exp(-||u||^2 / (2 sigma^2))."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    u = np.asarray(u, dtype=np.float64)
    return float(np.exp(-np.dot(u, u) / (2.0 * sigma * sigma)))


def kernel_normalizer(dim: int, sigma: float) -> float:
    """(2 pi sigma^2)^(-dim/2), the factor making the kernel a density."""
    return float((2.0 * np.pi * sigma * sigma) ** (-dim / 2.0))


def kernel_matrix(
    real: Matrix,
    fake: Matrix,
    sigma: float,
    normalized: bool = False,
) -> Matrix:
    """K[i, j] = k_sigma(fake_j - real_i) for every real/fake pair."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if real.ndim != 2 or fake.ndim != 2 or real.shape[1] != fake.shape[1]:
        raise ShapeError(f"real batch {real.shape} and fake batch {fake.shape} differ in width")
    # Explicit differences, not the |a|^2 + |b|^2 - 2ab expansion.
    diff = fake[np.newaxis, :, :] - real[:, np.newaxis, :]
    sq = np.sum(diff * diff, axis=2)
    k = np.exp(-sq / (2.0 * sigma * sigma))
    if normalized:
        k *= kernel_normalizer(real.shape[1], sigma)
    return k


def estimate_pgen(
    real_batch: Matrix,
    fake_batch: Matrix,
    sigma: float,
    normalized: bool = False,
) -> NDArray[np.float64]:
    """p_gen(x_i) = (1/n2) sum_j k_sigma(Gen(z_j) - x_i) for each real row x_i."""
    if fake_batch.shape[0] == 0:
        raise ParameterError("estimate_pgen needs at least one generated row")
    k = kernel_matrix(real_batch, fake_batch, sigma, normalized)
    return np.mean(k, axis=1)


def pgen_gradient(
    real_batch: Matrix,
    fake_batch: Matrix,
    sigma: float,
    grad_pgen: NDArray[np.float64],
    normalized: bool = False,
) -> Matrix:
    """Chain d(loss)/d(p_gen) back to each generated row."""
    k = kernel_matrix(real_batch, fake_batch, sigma, normalized)
    n2 = fake_batch.shape[0]
    w = grad_pgen[:, np.newaxis] * k / n2
    # d k_ij / d fake_j = -k_ij (fake_j - real_i) / sigma^2
    return -(np.sum(w, axis=0)[:, np.newaxis] * fake_batch - w.T @ real_batch) / (sigma * sigma)


def dual_update(
    p_gen: NDArray[np.float64],
    dis_on_real: NDArray[np.float64],
    beta: float,
) -> NDArray[np.float64]:
    """p~_gen(x_i) = p_gen(x_i) - beta * log(2 (1 - Dis(x_i)))."""
    p_gen = np.asarray(p_gen, dtype=np.float64)
    dis_on_real = np.asarray(dis_on_real, dtype=np.float64)
    if p_gen.shape != dis_on_real.shape:
        raise ShapeError(f"p_gen {p_gen.shape} and Dis values {dis_on_real.shape} differ")
    d = clamp_probability(dis_on_real)
    return p_gen - beta * np.log(2.0 * (1.0 - d))


def median_bandwidth(batch: Matrix) -> float:
    """Median pairwise Euclidean distance between rows, 1.0 if it degenerates."""
    n = batch.shape[0]
    if n < 2:
        logger.warning("Bandwidth needs two rows; falling back to sigma = 1.0")
        return 1.0
    diff = batch[:, np.newaxis, :] - batch[np.newaxis, :, :]
    dist = np.sqrt(np.sum(diff * diff, axis=2))
    upper = dist[np.triu_indices(n, k=1)]
    sigma = float(np.median(upper))
    if not sigma > 0:
        logger.warning("Median pairwise distance is zero; falling back to sigma = 1.0")
        return 1.0
    return sigma
