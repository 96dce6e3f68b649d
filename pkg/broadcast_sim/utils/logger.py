"""
Logging configuration and utilities.

Every record written by the handlers installed here carries a run context
(`command`, `seed`, ...) so that interleaved log lines from several CLI runs
in one log file can be told apart.
"""

import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path
import sys
from typing import Dict, Optional

from .errors import InvalidParameterError

# --- Logs directory sits at the project root, next to the package ---
PROJECT_ROOT = Path(__file__).resolve().parent.parent.parent
LOGS_DIR = PROJECT_ROOT / 'logs'
LOG_DIR_ENV = 'BROADCAST_SIM_LOG_DIR'

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - [%(run)s] %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class RunContextFilter(logging.Filter):
    """Stamps records with the current run context as `record.run` ('-' when empty)."""

    def __init__(self):
        super().__init__()
        self.context: Dict[str, object] = {}

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = " ".join(f"{key}={value}" for key, value in self.context.items()) or '-'
        return True


_RUN_CONTEXT = RunContextFilter()


def set_run_context(**fields) -> None:
    """Replace the run context; fields set to None are dropped."""
    _RUN_CONTEXT.context = {key: value for key, value in fields.items() if value is not None}


def parse_log_level(name: str) -> int:
    """Numeric level for a name such as 'debug' or 'WARNING'."""
    level = logging.getLevelName(str(name).upper())
    if not isinstance(level, int):
        raise InvalidParameterError(f"Unknown log level '{name}'")
    return level


def resolve_log_dir(log_dir: Optional[Path] = None) -> Path:
    """Explicit directory, else $BROADCAST_SIM_LOG_DIR, else <project>/logs."""
    if log_dir is not None:
        return Path(log_dir)
    override = os.environ.get(LOG_DIR_ENV)
    return Path(override) if override else LOGS_DIR


def setup_logging(
    log_filename: Optional[str] = 'broadcast_sim.log',
    log_dir: Optional[Path] = None,
    max_bytes: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5,
    level: int = logging.INFO,
    console_level: Optional[int] = None
) -> Optional[Path]:
    """
    Configure root logging: stderr always, a rotating file if a filename is
    given. Returns the log file path, or None when only the console is active.
    """
    formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

    if console_level is None:
        console_level = level

    root_logger = logging.getLogger()
    root_logger.setLevel(min(level, console_level))

    # Drop handlers from a previous call so CLI invocations in one process don't duplicate lines
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)
        handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.setLevel(console_level)
    console_handler.addFilter(_RUN_CONTEXT)
    root_logger.addHandler(console_handler)

    if not log_filename:
        logging.debug("Logging setup complete. Console handler only.")
        return None

    directory = resolve_log_dir(log_dir)
    log_path = directory / log_filename
    try:
        directory.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            log_path,
            maxBytes=max_bytes,
            backupCount=backup_count,
            encoding='utf-8'
        )
    except OSError as e:
        # Read-only checkouts still get console logging
        logging.warning(f"Could not open log file in {directory}: {e}. Console logging only.")
        return None
    file_handler.setFormatter(formatter)
    file_handler.setLevel(level)
    file_handler.addFilter(_RUN_CONTEXT)
    root_logger.addHandler(file_handler)
    logging.debug(f"Logging setup complete. File handler writing to: {log_path}")
    return log_path


class LoggingMixin:
    """Per-class logger named <module>.<ClassName>."""

    @property
    def logger(self) -> logging.Logger:
        if not hasattr(self, '_logger'):
            self._logger = logging.getLogger(f"{self.__module__}.{self.__class__.__name__}")
        return self._logger
