"""
Standard logging implementation of the Logger interface.
"""

import logging
from typing import Any

from .exceptions import ConfigError
from .interfaces import Logger


class StandardLogger(Logger):
    """
    Standard logging implementation using Python's logging module.

    Keyword context is forwarded as ``extra`` record attributes.
    """

    def __init__(self, name: str = "faslab", level: str = ""):
        self.logger = logging.getLogger(name)
        root = logging.getLogger("faslab")
        if not root.handlers:
            handler = logging.StreamHandler()
            formatter = logging.Formatter(
                '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
            )
            handler.setFormatter(formatter)
            root.addHandler(handler)
            root.setLevel(logging.INFO)
        if level:
            self.logger.setLevel(level.upper())

    def debug(self, message: str, **kwargs: Any) -> None:
        self.logger.debug(message, extra=kwargs)

    def info(self, message: str, **kwargs: Any) -> None:
        self.logger.info(message, extra=kwargs)

    def warning(self, message: str, **kwargs: Any) -> None:
        self.logger.warning(message, extra=kwargs)

    def error(self, message: str, **kwargs: Any) -> None:
        self.logger.error(message, extra=kwargs)


def configure_logging(level: str) -> None:
    """Set the level of every faslab logger."""
    if not isinstance(logging.getLevelName(level.upper()), int):
        raise ConfigError(f"Unknown log level: {level}")
    StandardLogger()
    logging.getLogger("faslab").setLevel(level.upper())
