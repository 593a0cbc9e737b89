"""Runtime defaults read from the environment"""

import os
from typing import Optional
from dotenv import load_dotenv

from ..errors import ConfigError


DEFAULT_SEED = 20240121


class RuntimeDefaults:
    """
    Process-wide defaults for seeds and logging.
    Values are loaded from environment variables (and a .env file if present).
    """
    _shared_instance = None

    def __init__(self):
        load_dotenv()
        self.seed = self._read_seed(os.getenv("DYNCRED_SEED"))
        self.log_level = os.getenv("DYNCRED_LOG_LEVEL", "INFO").upper()
        self.log_dir: Optional[str] = os.getenv("DYNCRED_LOG_DIR") or None

    @classmethod
    def shared(cls):
        """Get shared instance"""
        if cls._shared_instance is None:
            cls._shared_instance = cls()
        return cls._shared_instance

    @classmethod
    def reset(cls):
        """Drop the shared instance so the environment is re-read"""
        cls._shared_instance = None

    @staticmethod
    def _read_seed(raw: Optional[str]) -> int:
        if raw is None or raw.strip() == "":
            return DEFAULT_SEED
        try:
            seed = int(raw)
        except ValueError:
            raise ConfigError(f"DYNCRED_SEED must be a non-negative integer, got '{raw}'") from None
        if seed < 0:
            raise ConfigError(f"DYNCRED_SEED must be a non-negative integer, got {seed}")
        return seed

    def resolve_seed(self, cli_seed: Optional[int] = None,
                     config_seed: Optional[int] = None) -> int:
        """
        Pick the effective seed.

        Args:
            cli_seed: Value of the --seed flag
            config_seed: Seed found in the run configuration

        Returns:
            CLI flag, else config value, else the environment default
        """
        if cli_seed is not None:
            return cli_seed
        if config_seed is not None:
            return config_seed
        return self.seed
