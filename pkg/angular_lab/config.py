from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="ANGULAR_LAB_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    tool_name: str = "angular-lab"

    # Worker pool size for scans and convolutions (ANGULAR_LAB_THREADS)
    threads: int = 4

    # Comparison tolerance for non-rational reals
    tolerance: float = 1e-12

    # Radial quadrature
    radial_panel_order: int = 8
    radial_nodes: int = 256

    # Sphere quadrature level (polynomial exactness degree)
    sphere_level: int = 24

    # Adaptive 1D quadrature tolerance
    quad_tol: float = 1e-10

    # Singular-correction radius in local panel widths
    near_diagonal_spacings: int = 2

    # Refinement-doubling stopping rule for sup norms
    refine_rel_tol: float = 1e-6
    refine_max_doublings: int = 5

    # Periodic box: datum must sit within this fraction of L around the center
    support_fraction: float = 0.25
    support_threshold: float = 1e-6

    # Picard iteration
    picard_tol: float = 1e-13
    picard_stagnation_tol: float = 1e-3
    picard_keep_iterates: int = 2
    dealias_fraction: float = 2.0 / 3.0

    # Report serialization
    report_digits: int = 17


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
