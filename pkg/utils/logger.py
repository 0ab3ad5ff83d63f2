"""
Logging for whgrav

Every module logger is a child of the ``whgrav`` package logger, which owns the
two handlers: a console handler on stderr (quiet by default, the CLI writes its
error JSON there) and a daily file handler in Config.LOGS_DIR.
"""
import logging
import os
from datetime import datetime
from typing import Optional

from config import Config

PACKAGE_LOGGER = 'whgrav'

DETAILED_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
SIMPLE_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'


def log_file_path(day: Optional[datetime] = None) -> str:
    """Path of the daily log file"""
    day = day or datetime.now()
    return os.path.join(Config.LOGS_DIR, f'{PACKAGE_LOGGER}_{day.strftime("%Y%m%d")}.log')


def _package_logger() -> logging.Logger:
    root = logging.getLogger(PACKAGE_LOGGER)
    if root.handlers:
        return root

    Config.ensure_directories()
    root.setLevel(logging.DEBUG)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(getattr(logging, Config.CONSOLE_LOG_LEVEL, logging.WARNING))
    console_handler.setFormatter(logging.Formatter(SIMPLE_FORMAT, datefmt='%H:%M:%S'))
    root.addHandler(console_handler)

    file_handler = logging.FileHandler(log_file_path())
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(DETAILED_FORMAT, datefmt='%Y-%m-%d %H:%M:%S'))
    root.addHandler(file_handler)
    return root


def setup_logger(name: str = __name__, level: int = logging.DEBUG) -> logging.Logger:
    """
    Logger for a whgrav module

    Args:
        name: Module name (``__name__``); nested under the package logger
        level: Level of this logger; handlers filter further

    Returns:
        Logger whose records reach the package handlers
    """
    _package_logger()
    qualified = name if name == PACKAGE_LOGGER or name.startswith(PACKAGE_LOGGER + '.') \
        else f'{PACKAGE_LOGGER}.{name}'
    logger = logging.getLogger(qualified)
    logger.setLevel(level)
    return logger
