"""
Toolkit-wide logging.

Every module logs through a child of the `bbc` logger, which owns the single
stderr handler; stdout carries command output only. Context travels as an
`extra_data` dict and is appended to the message as sorted key=value pairs.
"""

import logging
import sys
from typing import Any, Dict, Optional

from app.config.settings import settings

ROOT_LOGGER = "bbc"
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def _root() -> logging.Logger:
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
        root.setLevel(settings.log_level.upper())
        root.propagate = False
    return root


def get_logger(name: str) -> logging.Logger:
    """
    Logger for a module of the toolkit.

    Args:
        name: Usually `__name__` of the calling module.

    Returns:
        logging.Logger: A child of the `bbc` logger.
    """
    _root()
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


def _render(message: str, extra_data: Optional[Dict[str, Any]]) -> str:
    if not extra_data:
        return message
    context = " ".join(f"{key}={extra_data[key]!r}" for key in sorted(extra_data))
    return f"{message} [{context}]"


def _log(logger: logging.Logger, level: int, message: str,
         extra_data: Optional[Dict[str, Any]]) -> None:
    # rendering a large state or graph is not free
    if logger.isEnabledFor(level):
        logger.log(level, _render(message, extra_data))


def log_debug(logger: logging.Logger, message: str,
              extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log at DEBUG; used for per-step exploration detail."""
    _log(logger, logging.DEBUG, message, extra_data)


def log_info(logger: logging.Logger, message: str,
             extra_data: Optional[Dict[str, Any]] = None) -> None:
    """
    Log an info level message with optional extra data.

    Args:
        logger: Logger instance.
        message: Log message.
        extra_data: Optional dictionary with additional information.
    """
    _log(logger, logging.INFO, message, extra_data)


def log_warning(logger: logging.Logger, message: str,
                extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log at WARNING, e.g. when an exploration hits its limits."""
    _log(logger, logging.WARNING, message, extra_data)


def log_error(logger: logging.Logger, message: str,
              extra_data: Optional[Dict[str, Any]] = None) -> None:
    """Log at ERROR; controllers pass the error's `to_dict()` as context."""
    _log(logger, logging.ERROR, message, extra_data)
