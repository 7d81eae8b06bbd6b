"""
The `gw` logger and its per-module children.

Records go to stderr at the level set by GW_LOG_LEVEL.
"""

import logging
import sys
from typing import Optional

from app.settings import settings

# Configure logging
LOG_LEVEL = settings.log_level.upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger("gw")
logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))

if not logger.handlers:
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console_handler)


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Get a logger instance with the given name.

    Args:
        name: Module name, logged as ``gw.<name>``. If None, returns ``gw`` itself.

    Returns:
        A logger instance.
    """
    if name:
        return logging.getLogger(f"gw.{name}")
    return logger
