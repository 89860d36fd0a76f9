"""
Configuration management using Pydantic settings.
Numerical tolerances, oracle defaults and parallelism, overridable through GRIDPLACE_* variables.
"""

from functools import lru_cache
import logging
import os

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings with environment variable support."""

    # Application configuration
    app_name: str = "gridplace"
    app_version: str = "1.0.0"
    environment: str = "development"
    log_level: str = "INFO"

    # Parallelism, 0 means one worker per CPU
    threads: int = 0

    # Grid loading
    balance_tolerance: float = 1e-8
    rebalance_tolerance: float = 1e-6

    # Power flow
    power_flow_tolerance: float = 1e-10
    power_flow_max_iter: int = 50

    # Spectral analysis
    symmetry_tolerance: float = 1e-10
    zero_mode_tolerance: float = 1e-9
    degeneracy_tolerance: float = 1e-8
    shape_sum_tolerance: float = 1e-9

    # Oracle integration
    oracle_max_dt: float = 1e-3
    oracle_horizon_factor: float = 20.0
    oracle_tail_tolerance: float = 1e-12
    oracle_max_doublings: int = 4
    fd_step: float = 1e-3

    # Perturbation theory
    include_zero_mode: bool = True

    # Reports
    report_format_version: str = "1"

    model_config = SettingsConfigDict(
        env_prefix="GRIDPLACE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("environment")
    @classmethod
    def validate_environment(cls, v):
        """Validate environment setting."""
        allowed_envs = ["development", "testing", "production"]
        if v not in allowed_envs:
            raise ValueError(f"Environment must be one of: {allowed_envs}")
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v):
        """Normalize and validate the logging level name."""
        level = str(v).upper()
        if not isinstance(logging.getLevelName(level), int):
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator("threads", "power_flow_max_iter", "oracle_max_doublings")
    @classmethod
    def validate_non_negative(cls, v):
        """Counts cannot be negative."""
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator(
        "balance_tolerance",
        "rebalance_tolerance",
        "power_flow_tolerance",
        "symmetry_tolerance",
        "zero_mode_tolerance",
        "degeneracy_tolerance",
        "shape_sum_tolerance",
        "oracle_max_dt",
        "oracle_horizon_factor",
        "oracle_tail_tolerance",
        "fd_step",
    )
    @classmethod
    def validate_positive(cls, v):
        """Tolerances and step sizes must be strictly positive."""
        if v <= 0:
            raise ValueError("must be > 0")
        return v

    @property
    def worker_count(self) -> int:
        """Effective number of worker threads."""
        return self.threads or (os.cpu_count() or 1)

    @property
    def is_testing(self) -> bool:
        """Check if running in testing mode."""
        return self.environment == "testing"


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.
    This ensures we only create one instance of settings throughout the process.
    """
    return Settings()
