"""Application configuration management."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="FAIRGEN_",
        case_sensitive=False,
    )

    # Reproducibility
    seed: int | None = Field(
        default=None,
        ge=0,
        description="Run seed used when no --seed option is given",
    )

    # Bias analysis
    gap_threshold: float = Field(
        default=0.1,
        ge=0.0,
        description="Mean-probability / accuracy gap that flags a targeted group",
    )
    histogram_bins: int = Field(default=10, ge=1, description="Prediction histogram bins")

    # Classifier evaluation
    repeats: int = Field(default=10, ge=2, description="Seeded repeats per evaluation")
    workers: int = Field(default=1, ge=1, description="Threads used for classifier repeats")

    # Artifacts
    float_digits: int = Field(
        default=10,
        ge=1,
        le=17,
        description="Decimal places for reals written to report artifacts",
    )

    # Application
    log_level: str = Field(default="INFO", description="Logging level")
    debug: bool = Field(default=False, description="Debug mode")

    def resolve_seed(self, seed: int | None) -> int:
        """Pick the explicit seed, then FAIRGEN_SEED, then 0."""
        if seed is not None:
            return seed
        if self.seed is not None:
            return self.seed
        return 0


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
