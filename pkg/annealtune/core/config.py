"""Configuration management for annealtune."""

from functools import lru_cache
from typing import Optional
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Process-level settings with environment variable support.

    Experiment parameters are not settings; they live in the JSON
    ``ExperimentConfig`` passed to the CLI.
    """

    VERSION: str = "0.1.0"

    # Output
    OUTPUT_DIR: str = Field(default="runs")

    # Parallelism (never changes results, only wall time)
    MAX_WORKERS: int = Field(default=1, ge=1)

    # Oracle refusal limits
    ORACLE_ISING_LIMIT: int = Field(default=24, ge=1)
    ORACLE_CUT_LIMIT: int = Field(default=24, ge=1)
    ORACLE_PARTITION_LIMIT: int = Field(default=22, ge=1)
    ORACLE_CLIQUE_LIMIT: int = Field(default=64, ge=1)

    # Logging settings
    LOG_LEVEL: str = Field(default="INFO")
    LOG_FORMAT: str = Field(default="console")
    LOG_FILE: Optional[str] = Field(default=None)

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v):
        """Validate log level."""
        allowed_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_levels:
            raise ValueError(f"Log level must be one of: {allowed_levels}")
        return v.upper()

    @field_validator("LOG_FORMAT")
    @classmethod
    def validate_log_format(cls, v):
        """Validate log renderer."""
        allowed_formats = ["json", "console"]
        if v.lower() not in allowed_formats:
            raise ValueError(f"Log format must be one of: {allowed_formats}")
        return v.lower()

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": True,
        "extra": "ignore"  # Ignore extra environment variables
    }


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
