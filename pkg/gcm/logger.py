import os
import sys
import logging
from logging.handlers import RotatingFileHandler

from gcm.config import current_config

"""
Centralized Logger Module for the gcm simulator

This module implements a singleton pattern for logging setup to ensure that:
1. Logging is only initialized once, regardless of how many times setup_logging() is called
2. All modules use the same log file and configuration
3. Console output goes to stderr so CSV/SVG written to stdout or files stays untouched

Usage:
    from gcm.logger import setup_logging, get_logger
    setup_logging()  # Only the CLI entry point calls this
    logger = get_logger(__name__)
    logger.info("Your log message")
"""

# Global variable to store the current log file path
_current_log_file_path = None
_logging_initialized = False


def setup_logging(level: str = None):
    """Setup logging to a single rotating file plus stderr (singleton pattern)"""
    global _current_log_file_path, _logging_initialized

    # If logging is already initialized, return the existing log file path
    if _logging_initialized:
        return _current_log_file_path

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%d-%m-%Y %H:%M:%S'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level or current_config.log_level())

    # Remove any existing handlers to avoid duplicates
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    # maxBytes=10MB, backupCount=5 (keeps 5 backup files)
    log_filepath = None
    try:
        log_dir = current_config.GCM_LOG_DIR
        os.makedirs(log_dir, exist_ok=True)
        log_filepath = os.path.join(log_dir, "gcm.log")
        rotating_handler = RotatingFileHandler(
            log_filepath,
            maxBytes=10*1024*1024,
            backupCount=5,
            encoding='utf-8'
        )
        rotating_handler.setFormatter(formatter)
        root_logger.addHandler(rotating_handler)
    except (PermissionError, OSError) as e:
        log_filepath = None
        root_logger.warning(f"File logging not available: {e}. Logging to stderr only.")

    _current_log_file_path = log_filepath
    _logging_initialized = True

    return log_filepath


def get_logger(name: str = None):
    """Get a logger instance with the specified name"""
    if name is None:
        name = __name__
    return logging.getLogger(name)
