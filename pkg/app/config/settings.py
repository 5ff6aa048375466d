"""
Toolkit configuration with Pydantic Settings.
Reads BBC_* environment variables and the optional .env file.
"""
# pylint: disable=R0903
from typing import Literal

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Main toolkit configuration."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="BBC_",
        case_sensitive=False,
        extra="ignore",
    )

    max_states: int = Field(default=50_000, gt=0)
    unfold_budget: int = Field(default=32, gt=0)
    max_steps: int = Field(default=10_000, gt=0)
    default_mode: Literal["default", "exhaustive"] = "default"
    barb_mode: Literal["strict", "weak"] = "strict"

    log_level: str = "WARNING"

    app_name: str = "BBC Toolkit"
    app_version: str = "1.1.0"


def load_settings(env_file: str = ".env") -> Settings:
    """Export `env_file` into the environment, then read the settings.

    Variables already set in the environment win over the file.
    """
    load_dotenv(env_file)
    return Settings()


settings = load_settings()
