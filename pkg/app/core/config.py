"""
Application Configuration
Process-level settings read from LOUPE_* environment variables or a .env file.
"""
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """Application settings"""
    # Application
    app_name: str = "LOUPE Desk"
    app_version: str = "1.0.0"

    # Runtime
    threads: Optional[int] = Field(None, ge=1, description="Worker cap for torch intra-op parallelism")
    deterministic: bool = True

    # Logging
    log_level: str = "INFO"

    class Config:
        env_prefix = "LOUPE_"
        env_file = ".env"
        case_sensitive = False
        extra = "ignore"

settings = Settings()
