"""Centralized logging configuration for the otfmri package

Every module logs through a child of the ``otfmri`` logger. Handlers live on
that package logger only, so a run can point logging at its own file by
calling :meth:`LoggerSetup.configure` once.
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional

PACKAGE_LOGGER = 'otfmri'

DEFAULT_LOGGING_CONFIG = {
    'level': 'INFO',
    'file_path': './logs/otfmri.log',
    'max_file_size': '10MB',
    'backup_count': 5
}

_SIZE_UNITS = (('GB', 1024 ** 3), ('MB', 1024 ** 2), ('KB', 1024), ('B', 1))


def parse_size(size_str, default: int = 10 * 1024 ** 2) -> int:
    """Parse "10MB"-style sizes to bytes; unreadable values give ``default``"""
    text = str(size_str).strip().upper()
    for unit, multiplier in _SIZE_UNITS:
        if text.endswith(unit):
            try:
                return int(float(text[:-len(unit)]) * multiplier)
            except ValueError:
                return default
    return default


class LoggerSetup:
    """Owns the handlers of the package logger"""

    _instance = None
    _config = dict(DEFAULT_LOGGING_CONFIG)
    _configured = False

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(LoggerSetup, cls).__new__(cls)
        return cls._instance

    @staticmethod
    def configure(config: Optional[dict] = None) -> logging.Logger:
        """Replace the package handlers with ones built from ``config``

        Keys:
            level: console level (DEBUG, INFO, WARNING, ERROR)
            file_path: log file, rotated at max_file_size
            max_file_size: e.g. "10MB"
            backup_count: rotated files to keep
        """
        merged = dict(DEFAULT_LOGGING_CONFIG)
        merged.update(config or {})
        LoggerSetup.shutdown()

        package = logging.getLogger(PACKAGE_LOGGER)
        package.setLevel(logging.DEBUG)
        package.propagate = False

        log_file = merged['file_path']
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        file_handler = RotatingFileHandler(log_file, maxBytes=parse_size(merged['max_file_size']),
                                           backupCount=merged['backup_count'])
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        ))

        # stdout is reserved for command summaries
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(getattr(logging, str(merged['level']).upper(), logging.INFO))
        console_handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))

        package.addHandler(file_handler)
        package.addHandler(console_handler)
        LoggerSetup._config = merged
        LoggerSetup._configured = True
        return package

    @staticmethod
    def get_logger(name: str) -> logging.Logger:
        """Child of the package logger; configures defaults on first use"""
        if not LoggerSetup._configured:
            LoggerSetup.configure(LoggerSetup._config)
        if name.startswith('src.'):
            name = name[len('src.'):]
        if name in ('', 'src', PACKAGE_LOGGER):
            return logging.getLogger(PACKAGE_LOGGER)
        if not name.startswith(PACKAGE_LOGGER + '.'):
            name = f"{PACKAGE_LOGGER}.{name}"
        return logging.getLogger(name)

    @staticmethod
    def shutdown():
        """Close and detach the package handlers"""
        package = logging.getLogger(PACKAGE_LOGGER)
        for handler in package.handlers[:]:
            handler.close()
            package.removeHandler(handler)
        LoggerSetup._configured = False


class LoggerMixin:
    """Gives a class a lazily created ``self.logger`` named after the class"""

    @property
    def logger(self) -> logging.Logger:
        if not hasattr(self, '_logger'):
            self._logger = LoggerSetup.get_logger(
                f"{self.__class__.__module__}.{self.__class__.__name__}")
        return self._logger


def get_logger(name: str = None) -> logging.Logger:
    """Convenience function to get a logger

    Args:
        name: Logger name, defaults to caller's module name
    """
    if name is None:
        import inspect
        frame = inspect.currentframe()
        name = frame.f_back.f_globals.get('__name__', PACKAGE_LOGGER) if frame and frame.f_back \
            else PACKAGE_LOGGER
    return LoggerSetup.get_logger(name)
