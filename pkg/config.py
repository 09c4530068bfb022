"""Configuration settings for the K-stability verifier."""

from pathlib import Path
from typing import Optional

from src.utils import get_env_int, get_env_str

PROJECT_ROOT = Path(__file__).resolve().parent
DEFAULT_SCENARIO = PROJECT_ROOT / "data" / "fano222.json"


class Settings:
    """Application settings."""

    def __init__(self):
        # Scenario
        self.scenario_path: Path = Path(get_env_str("KSTAB_SCENARIO", str(DEFAULT_SCENARIO)))

        # Engine limits
        self.refinement_depth: int = get_env_int("KSTAB_REFINEMENT_DEPTH", 8)

        # Processing settings
        self.max_workers: int = get_env_int("KSTAB_MAX_WORKERS", 4)
        self.output_dir: Path = Path(get_env_str("KSTAB_OUTPUT_DIR", "output"))

        # Logging
        self.log_level: str = get_env_str("KSTAB_LOG_LEVEL", "INFO")
        self.log_file: Optional[str] = get_env_str("KSTAB_LOG_FILE")


# Global settings instance
settings = Settings()
