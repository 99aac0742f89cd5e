"""Process settings using pydantic-settings."""
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Defaults for every command; flags override them."""

    model_config = SettingsConfigDict(
        env_prefix="CNETKAT_", env_file=".env", env_file_encoding="utf-8", case_sensitive=False, extra="ignore"
    )

    # Application
    app_env: Literal["dev", "prod"] = Field(default="dev", description="Application environment")

    # Bounds
    star: int = Field(default=3, ge=0, description="Unrollings of each star (K)")
    pad: int = Field(default=1, ge=0, description="State padding nodes on each side of a store event (P)")

    # Budgets
    node_budget: int = Field(default=24, ge=1, description="Largest pomset an evaluation may build")
    closure_budget: int = Field(default=100_000, ge=1, description="Largest closure or search population")
    trace_budget: int = Field(default=100_000, ge=1, description="Largest trace set an evaluation may build")
    q_budget: int = Field(default=256, ge=1, description="Largest packet-set index of a normal-form matrix")
    max_vars: int = Field(default=4, ge=0, description="Most global variables a universe may declare")
    max_values: int = Field(default=4, ge=1, description="Most values a global variable may take")

    # Logging
    log_level: str = Field(default="WARNING", description="Logging level")
    log_format: Literal["console", "json"] | None = Field(
        default=None, description="Log renderer; console in dev and json in prod when unset"
    )


# Global settings instance
settings = Settings()
