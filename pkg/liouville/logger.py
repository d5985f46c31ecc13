"""Logging configuration for liouville.

This module provides centralized logging setup with:
- Console handler at the requested level (stderr)
- File handler (DEBUG level) writing liouville.log into the run directory
- Consistent formatting across handlers

Library modules log through child loggers (liouville.gff, liouville.clock, ...)
which propagate to the package logger configured here.
"""

import logging
from pathlib import Path
from typing import Optional

LOGGER_NAME = "liouville"
LOG_FILE = "liouville.log"


def setup_logging(
    run_dir: Optional[Path] = None,
    log_level: str = "INFO"
) -> logging.Logger:
    """Set up logging with console and file handlers.

    Args:
        run_dir: Directory receiving liouville.log; None for console only
        log_level: Log level for console output (DEBUG, INFO, WARNING, ERROR)

    Returns:
        Configured package logger
    """
    logger = logging.getLogger(LOGGER_NAME)

    # Clear any existing handlers to avoid duplicates across runs
    for handler in list(logger.handlers):
        handler.close()
    logger.handlers.clear()
    logger.setLevel(logging.DEBUG)
    logger.propagate = False

    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    console_handler = logging.StreamHandler()
    console_handler.setLevel(getattr(logging, log_level.upper(), logging.INFO))
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if run_dir is not None:
        try:
            run_dir.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(run_dir / LOG_FILE, mode='a', encoding='utf-8')
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except OSError as e:
            logger.warning(f"Could not create log file: {e}")

    return logger


def close_logging() -> None:
    """Detach and close all package handlers (releases the log file)."""
    logger = logging.getLogger(LOGGER_NAME)
    for handler in list(logger.handlers):
        handler.close()
        logger.removeHandler(handler)
