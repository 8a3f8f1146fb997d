from pathlib import Path
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="FAMA_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    # Application
    app_name: str = "fama-ic"
    log_level: str = "INFO"

    # Geometry
    correlation_kernel: Literal["spherical", "cylindrical"] = "spherical"
    jitter_start: float = 1e-12
    jitter_factor: float = 10.0
    jitter_cap: float = 1e-6

    # Marginals
    hypoexp_equal_rtol: float = 1e-9  # Erlang-2 fallback below this |Δ|/max

    # Copula / MVN integration
    copula_tol: float = 1e-4
    copula_tol_floor: float = 1e-8
    copula_rel_tol: float = 0.05
    mvn_randomizations: int = Field(12, ge=2)
    mvn_min_points: int = Field(2**10, ge=2)
    mvn_max_points: int = 2**22
    mvn_block: int = 2**14  # points per vectorised batch
    mvn_dim_cap: int = 256

    # Metrics
    interference_policy: Literal["error", "warn"] = "error"
    dor_variant: Literal["derived", "theorem", "proof"] = "derived"

    # Monte Carlo
    mc_trials: int = 100_000
    mc_chunk: int = 65_536
    mc_seed: int = 0
    mc_sampler: Literal["copula", "physical"] = "copula"
    mc_workers: int = Field(1, ge=1)
    mc_max_trials: int = 10**8
    mc_rare_event: float = 1e-5

    # Sweeps / output
    sweep_workers: int = Field(4, ge=1)
    output_dir: Path = Path("./results")


settings = Settings()
