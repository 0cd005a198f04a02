"""
Logging utilities for the orbitvqc toolkit.

Grid rows train concurrently, so the default format carries the thread name
and row-level messages go through a ``RowLogger`` that prefixes them with
the experiment id and row label.
"""

import logging
import time
from functools import wraps
from typing import Any, Callable, MutableMapping, Optional, Tuple

DEFAULT_FORMAT = '%(asctime)s - %(levelname)s - [%(threadName)s] %(message)s'


def setup_logging(level: int = logging.INFO, format_string: Optional[str] = None,
                  log_file: Optional[str] = None) -> logging.Logger:
    """
    Set up logging configuration for the application.

    Args:
        level: Logging level (default: INFO)
        format_string: Custom format string for log messages
        log_file: Also write records to this file (appending)

    Returns:
        The package logger
    """
    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))

    logging.basicConfig(
        level=level,
        format=format_string or DEFAULT_FORMAT,
        handlers=handlers,
        force=True  # Override any existing configuration
    )

    return logging.getLogger("orbitvqc")


def log_execution_time(func: Callable) -> Callable:
    """Log how long ``func`` took, through the logger of the module defining it."""
    @wraps(func)
    def wrapper(*args, **kwargs) -> Any:
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        elapsed = time.perf_counter() - start_time
        logging.getLogger(func.__module__).info(
            f"Function '{func.__name__}' took {elapsed:.2f} seconds"
        )
        return result
    return wrapper


class RowLogger(logging.LoggerAdapter):
    """Prefixes every message with ``[<experiment> <row>]``."""

    def process(self, msg: Any, kwargs: MutableMapping[str, Any]) -> Tuple[Any, MutableMapping[str, Any]]:
        return f"[{self.extra['experiment']} {self.extra['row']}] {msg}", kwargs


def row_logger(experiment: str, row: str) -> RowLogger:
    """Logger for one grid row of ``experiment``."""
    return RowLogger(logging.getLogger("orbitvqc.experiments"), {"experiment": experiment, "row": row})
