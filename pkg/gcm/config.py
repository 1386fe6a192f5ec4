"""
Configuration management for the Gaussian collision-model simulator.
Handles environment-based runtime settings (worker cap, logging, output paths).
"""

import os
from dotenv import load_dotenv

load_dotenv()


class ConfigError(ValueError):
    """Raised when an environment setting cannot be interpreted."""

    def __init__(self, name: str, message: str):
        super().__init__(f"{name}: {message}")
        self.field = name


class Config:
    """Runtime settings read from the environment (or a .env file)."""

    # Sweep parallelism; None means "use the machine's logical core count"
    GCM_THREADS = os.getenv("GCM_THREADS")

    # Logging
    GCM_LOG_LEVEL = os.getenv("GCM_LOG_LEVEL", "INFO")
    GCM_LOG_DIR = os.getenv("GCM_LOG_DIR", os.path.join(os.getcwd(), "logs"))

    # Default output directory for CSV/SVG artifacts
    GCM_OUTPUT_DIR = os.getenv("GCM_OUTPUT_DIR", os.path.join(os.getcwd(), "gcm_output"))

    @classmethod
    def reload(cls):
        """Re-read the environment (used after tests or the CLI patch os.environ)."""
        cls.GCM_THREADS = os.getenv("GCM_THREADS")
        cls.GCM_LOG_LEVEL = os.getenv("GCM_LOG_LEVEL", "INFO")
        cls.GCM_LOG_DIR = os.getenv("GCM_LOG_DIR", os.path.join(os.getcwd(), "logs"))
        cls.GCM_OUTPUT_DIR = os.getenv("GCM_OUTPUT_DIR", os.path.join(os.getcwd(), "gcm_output"))

    @classmethod
    def worker_count(cls) -> int:
        """
        Number of sweep workers.

        Returns:
            GCM_THREADS when set, otherwise the logical core count

        Raises:
            ConfigError: If GCM_THREADS is not a positive integer
        """
        raw = cls.GCM_THREADS
        if raw is None or raw.strip() == "":
            return os.cpu_count() or 1
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError("GCM_THREADS", f"expected a positive integer, got {raw!r}")
        if value < 1:
            raise ConfigError("GCM_THREADS", f"expected a positive integer, got {value}")
        return value

    @classmethod
    def log_level(cls) -> str:
        """Logging level name, upper-cased."""
        return cls.GCM_LOG_LEVEL.upper()


def get_config():
    """
    Get the active configuration class.

    Returns:
        Config class with values refreshed from the environment
    """
    Config.reload()
    return Config


# Export the current configuration
current_config = Config
