"""Dense linear algebra and seeded sampling."""

from src.numerics.linalg import Matrix, as_matrix, ensure_finite, matmul
from src.numerics.random import SeededRng, sample_gaussian, sample_gumbel, sample_uniform

__all__ = [
    "Matrix",
    "SeededRng",
    "as_matrix",
    "ensure_finite",
    "matmul",
    "sample_gaussian",
    "sample_gumbel",
    "sample_uniform",
]
