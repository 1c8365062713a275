"""
Logging setup shared by every module.
Console output goes to stderr so JSON reports on stdout stay machine-readable;
a DEBUG file log is added when FORMLAB_LOG_FILE is configured.
"""

import logging
import sys
from typing import Optional

from src.config import get_formlab_config

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

_console_level: Optional[int] = None


def _level_from_name(name: str) -> int:
    level = logging.getLevelName(str(name).upper())
    return level if isinstance(level, int) else logging.WARNING


def get_logger(name: str) -> logging.Logger:
    """Return a module logger with console (and optional file) handlers attached once"""
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG)

    # Create handlers if they don't exist
    if not logger.handlers:
        config = get_formlab_config()

        # Console handler
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(_console_level or _level_from_name(config["log_level"]))

        formatter = logging.Formatter(LOG_FORMAT)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        # File handler
        if config["log_file"]:
            file_handler = logging.FileHandler(config["log_file"])
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        logger.propagate = False

    return logger


def set_console_level(level_name: str) -> None:
    """Change the console level of every lab logger (used by --log-level)"""
    global _console_level
    _console_level = _level_from_name(level_name)
    for name, candidate in logging.root.manager.loggerDict.items():
        if not name.startswith("src") or not isinstance(candidate, logging.Logger):
            continue
        for handler in candidate.handlers:
            if type(handler) is logging.StreamHandler:
                handler.setLevel(_console_level)
