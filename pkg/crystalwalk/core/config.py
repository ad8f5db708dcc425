"""
Application configuration settings
"""

import os
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    # Reproducibility
    CRYSTALWALK_SEED: Optional[int] = None  # Fallback when --seed is not given

    # Parallelism
    CRYSTALWALK_THREADS: Optional[int] = None  # None means all available cores
    BATCH_BLOCK_SIZE: int = 512  # Replicates per merge leaf, independent of thread count

    # Sampling
    RNG_CHUNK_SIZE: int = 65_536
    TRAJECTORY_CAP: int = 10_000_000

    # Environment
    DEBUG: bool = False  # Re-derive vertex classes from coordinates on classify()

    # Logging
    LOG_LEVEL: str = "INFO"

    @property
    def threads(self) -> int:
        """Resolve the worker count"""
        if self.CRYSTALWALK_THREADS and self.CRYSTALWALK_THREADS > 0:
            return self.CRYSTALWALK_THREADS
        return os.cpu_count() or 1


settings = Settings()
