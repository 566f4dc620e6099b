"""
Logging utilities for the persistent-current simulator

Provides centralized logging configuration with rich console output and an
optional log file.
"""

import functools
import logging
import sys
import time
from typing import Optional
from pathlib import Path
from rich.logging import RichHandler
from rich.console import Console

LOGGER_ROOT = "nh_current"
_DEFAULT_LEVEL = "INFO"


def setup_logger(
    name: str,
    level: str = "INFO",
    log_file: Optional[str] = None,
    use_rich: bool = True,
) -> logging.Logger:
    """
    Set up a logger with rich formatting and optional file output.

    Args:
        name: Logger name
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional file path for log output
        use_rich: Whether to use rich formatting for console output

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    log_level = getattr(logging, level.upper(), logging.INFO)
    logger.setLevel(log_level)
    logger.propagate = False

    formatter = logging.Formatter(
        fmt='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )

    if use_rich:
        console_handler = RichHandler(
            console=Console(stderr=True),
            show_time=True,
            show_path=False,
            markup=True,
            rich_tracebacks=True
        )
        console_handler.setFormatter(
            logging.Formatter(fmt='%(message)s', datefmt='%Y-%m-%d %H:%M:%S')
        )
    else:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)

    console_handler.setLevel(log_level)
    logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        file_handler.setLevel(log_level)
        logger.addHandler(file_handler)

    return logger


def configure_root_logger(level: str = "INFO", log_file: Optional[str] = None, use_rich: bool = True) -> None:
    """
    Configure the handlers shared by every simulator logger.

    Module loggers carry no handlers of their own and propagate to the
    ``nh_current`` logger, so the console and the log file see every record.
    """
    global _DEFAULT_LEVEL
    _DEFAULT_LEVEL = level.upper()
    setup_logger(LOGGER_ROOT, level=level, log_file=log_file, use_rich=use_rich)
    for name, existing in list(logging.Logger.manager.loggerDict.items()):
        if name.startswith(f"{LOGGER_ROOT}.") and isinstance(existing, logging.Logger):
            for handler in list(existing.handlers):
                existing.removeHandler(handler)
                handler.close()
            existing.setLevel(logging.NOTSET)
            existing.propagate = True


class PipelineLogger:
    """Context manager for stage logging with timing."""

    def __init__(self, name: str, operation: str):
        """
        Initialize pipeline logger.

        Args:
            name: Logger name
            operation: Operation being performed
        """
        self.logger = get_pipeline_logger(name)
        self.operation = operation
        self.start_time: Optional[float] = None
        self.duration: float = 0.0

    def __enter__(self):
        """Enter context and log start of operation."""
        self.start_time = time.perf_counter()
        self.logger.info(f"Starting {self.operation}")
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        """Exit context and log completion or error."""
        self.duration = time.perf_counter() - self.start_time if self.start_time else 0.0

        if exc_type is None:
            self.logger.info(f"Completed {self.operation} in {self.duration:.2f}s")
        else:
            self.logger.error(f"Failed {self.operation} after {self.duration:.2f}s: {exc_val}")

        return False


def log_function_call(func):
    """Decorator to log function calls with execution time."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        logger = logging.getLogger(f"{LOGGER_ROOT}.{func.__module__.split('.')[-1]}")
        logger.debug(f"Calling {func.__name__}")

        start_time = time.perf_counter()
        try:
            result = func(*args, **kwargs)
            duration = time.perf_counter() - start_time
            logger.debug(f"{func.__name__} completed in {duration:.3f}s")
            return result
        except Exception as e:
            duration = time.perf_counter() - start_time
            logger.error(f"{func.__name__} failed after {duration:.3f}s: {e}")
            raise

    return wrapper


def get_pipeline_logger(module_name: str) -> logging.Logger:
    """
    Get a standardized logger for simulator modules.

    Args:
        module_name: Name of the module requesting the logger

    Returns:
        Configured logger instance
    """
    if not logging.getLogger(LOGGER_ROOT).handlers:
        setup_logger(LOGGER_ROOT, level=_DEFAULT_LEVEL, use_rich=True)
    return logging.getLogger(f"{LOGGER_ROOT}.{module_name}")
