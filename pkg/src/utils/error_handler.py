"""Centralized error handling and logging for the otfmri package"""

import logging
import traceback
from datetime import datetime
from functools import wraps
from typing import Any, Callable, Optional

# Process exit codes, stable across releases
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_DATA_ERROR = 3
EXIT_NUMERICAL_ABORT = 4


class OTFmriError(Exception):
    """Base exception class for the otfmri package"""
    pass


class ConfigurationError(OTFmriError):
    """Raised when configuration is invalid"""
    pass


class ValidationError(OTFmriError):
    """Raised when an input value or document fails validation"""
    pass


class DataError(OTFmriError):
    """Raised when dataset files or manifests are unusable"""
    pass


class DecodeError(DataError):
    """Raised when a binary file cannot be decoded

    The byte offset at which decoding failed is kept on ``offset``.
    """

    def __init__(self, message: str, offset: int, path: Optional[str] = None):
        self.offset = offset
        self.path = path
        location = f" in {path}" if path else ""
        super().__init__(f"{message} at byte offset {offset}{location}")


class ShapeError(DataError):
    """Raised when array shapes or vertex counts do not agree"""
    pass


class SplitError(ValidationError):
    """Raised when a train/test split is inconsistent"""
    pass


class NumericalError(OTFmriError):
    """Raised when a computation produces non-finite values"""

    def __init__(self, message: str, where: Optional[str] = None,
                 last_checkpoint: Optional[str] = None):
        self.where = where
        self.last_checkpoint = last_checkpoint
        super().__init__(message)


class ExportError(OTFmriError):
    """Raised when export operations fail"""
    pass


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the process exit code of the CLI"""
    if isinstance(error, NumericalError):
        return EXIT_NUMERICAL_ABORT
    if isinstance(error, ConfigurationError):
        return EXIT_CONFIG_ERROR
    if isinstance(error, (DataError, ValidationError, ExportError, OSError)):
        return EXIT_DATA_ERROR
    return EXIT_DATA_ERROR


class ErrorHandler:
    """Centralized error handling and logging"""

    def __init__(self, logger: Optional[logging.Logger] = None):
        if logger is None:
            from .logger import get_logger
            logger = get_logger(__name__)
        self.logger = logger
        self.error_log = []
        self.max_error_log_size = 100

    def handle_data_error(self, operation: str, error: Exception) -> str:
        """Handle dataset and file errors with location context"""
        error_msg = f"Data operation '{operation}' failed"

        if isinstance(error, DecodeError):
            error_msg += f"\nDecode Error: {error}"
        elif isinstance(error, ShapeError):
            error_msg += f"\nShape Error: {error}"
        elif isinstance(error, FileNotFoundError):
            error_msg += f"\nMissing file: {error.filename or error}"
        else:
            error_msg += f"\nError: {error}"

        self.logger.error(error_msg)
        self.log_error('data', error_msg, {'operation': operation, 'error': str(error)})
        return error_msg

    def handle_numerical_error(self, operation: str, error: Exception) -> str:
        """Handle non-finite values during training or inference"""
        error_msg = f"Numerical abort in '{operation}': {error}"
        last = getattr(error, 'last_checkpoint', None)
        if last:
            error_msg += f"\nLast good checkpoint: {last}"

        self.logger.error(f"{error_msg}\n{traceback.format_exc()}")
        self.log_error('numerical', error_msg, {'operation': operation, 'error': str(error)})
        return error_msg

    def handle_config_error(self, operation: str, error: Exception) -> str:
        """Handle configuration errors"""
        error_msg = f"Invalid configuration for '{operation}': {error}"
        self.logger.error(error_msg)
        self.log_error('config', error_msg, {'operation': operation, 'error': str(error)})
        return error_msg

    def handle_export_error(self, export_type: str, error: Exception) -> str:
        """Handle export errors with file context"""
        error_msg = f"Export operation '{export_type}' failed"

        if "permission" in str(error).lower():
            error_msg += "\nFile permission denied. Please check write permissions."
        elif "space" in str(error).lower():
            error_msg += "\nInsufficient disk space."
        else:
            error_msg += f"\nError: {error}"

        self.logger.error(f"{error_msg}\n{traceback.format_exc()}")
        self.log_error('export', error_msg, {'export_type': export_type, 'error': str(error)})
        return error_msg

    def handle(self, operation: str, error: Exception) -> str:
        """Dispatch an error to the matching category handler"""
        if isinstance(error, NumericalError):
            return self.handle_numerical_error(operation, error)
        if isinstance(error, ConfigurationError):
            return self.handle_config_error(operation, error)
        if isinstance(error, ExportError):
            return self.handle_export_error(operation, error)
        return self.handle_data_error(operation, error)

    def log_error(self, category: str, message: str, context: dict = None):
        """Log error for later analysis"""
        self.error_log.append({
            'timestamp': datetime.now().isoformat(),
            'category': category,
            'message': message,
            'context': context or {}
        })

        if len(self.error_log) > self.max_error_log_size:
            self.error_log = self.error_log[-self.max_error_log_size:]

    def get_error_summary(self) -> dict:
        """Get summary of recent errors"""
        if not self.error_log:
            return {'total': 0, 'by_category': {}}

        summary = {
            'total': len(self.error_log),
            'by_category': {},
            'recent': self.error_log[-10:]
        }

        for error in self.error_log:
            category = error['category']
            summary['by_category'][category] = summary['by_category'].get(category, 0) + 1

        return summary

    def clear_error_log(self):
        self.error_log.clear()
        self.logger.info("Error log cleared")


def error_handler(error_type: type = Exception,
                  handler_func: Optional[Callable] = None,
                  default_return: Any = None,
                  reraise: bool = False):
    """Decorator for automatic error handling

    Args:
        error_type: Type of exception to catch
        handler_func: Optional custom handler function
        default_return: Default value to return on error
        reraise: Whether to re-raise the exception after handling

    Example:
        @error_handler(DecodeError, reraise=True)
        def load_sample(path):
            ...
    """
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            try:
                return func(*args, **kwargs)
            except error_type as e:
                from .logger import get_logger
                logger = get_logger(func.__module__)
                logger.error(f"Error in {func.__name__}: {e}")

                if handler_func:
                    result = handler_func(e, *args, **kwargs)
                    if result is not None:
                        return result

                if reraise:
                    raise

                return default_return

        return wrapper
    return decorator


class ErrorContext:
    """Context manager for error handling blocks"""

    def __init__(self, operation: str, error_handler: ErrorHandler = None):
        self.operation = operation
        self.error_handler = error_handler or get_error_handler()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if exc_type is not None and issubclass(exc_type, Exception):
            if issubclass(exc_type, (OTFmriError, OSError)):
                self.error_handler.handle(self.operation, exc_val)
            else:
                self.error_handler.logger.error(
                    f"Unexpected error in {self.operation}: {exc_val}\n{traceback.format_exc()}"
                )

        # Don't suppress the exception
        return False


_global_error_handler = None


def get_error_handler() -> ErrorHandler:
    """Get global error handler instance"""
    global _global_error_handler
    if _global_error_handler is None:
        _global_error_handler = ErrorHandler()
    return _global_error_handler


def set_error_handler(handler: ErrorHandler):
    """Set global error handler instance"""
    global _global_error_handler
    _global_error_handler = handler
