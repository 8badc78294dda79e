#!/usr/bin/env python3
"""
Logging system for the FvK plate toolkit
"""

import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import Optional, Union


FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(module)s:%(lineno)d - %(message)s'


class ColoredFormatter(logging.Formatter):
    """Colored log formatter for terminal output"""

    # ANSI color codes
    COLORS = {
        'DEBUG': '\033[36m',    # Cyan
        'INFO': '\033[32m',     # Green
        'WARNING': '\033[33m',  # Yellow
        'ERROR': '\033[31m',    # Red
        'CRITICAL': '\033[35m', # Magenta
    }
    RESET = '\033[0m'

    def format(self, record):
        # Color a copy so file handlers keep the plain level name
        record = logging.makeLogRecord(record.__dict__)
        if record.levelname in self.COLORS:
            record.levelname = f"{self.COLORS[record.levelname]}{record.levelname}{self.RESET}"
        return super().format(record)


class AppLogger:
    """Application logger with daily file, console and per-run output"""

    def __init__(self, name: str = "FvKPlate", log_dir: Optional[str] = None):
        """Initialize logger

        Args:
            name: Logger name
            log_dir: Directory for daily log files. If None, uses ~/.fvk_plate/logs
        """
        self.logger = logging.getLogger(name)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False
        self._run_handler: Optional[logging.Handler] = None

        # Prevent duplicate handlers
        if self.logger.handlers:
            return

        self.log_dir = Path(log_dir) if log_dir else Path.home() / ".fvk_plate" / "logs"

        self._setup_console_handler()
        try:
            self.log_dir.mkdir(parents=True, exist_ok=True)
            self._setup_file_handler()
        except OSError as e:
            self.logger.warning(f"File logging disabled ({self.log_dir}: {e})")

    def _setup_file_handler(self):
        """Set up file handler for logging to file"""
        log_file = self.log_dir / f"fvk_{datetime.now().strftime('%Y%m%d')}.log"

        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))

        self.logger.addHandler(file_handler)

    def _setup_console_handler(self):
        """Set up console handler for terminal output"""
        console_handler = logging.StreamHandler(sys.stdout)
        console_handler.setLevel(logging.INFO)

        console_formatter = ColoredFormatter(
            '%(asctime)s - %(levelname)s - %(message)s',
            datefmt='%H:%M:%S'
        )
        console_handler.setFormatter(console_formatter)

        self.logger.addHandler(console_handler)

    def attach_run_log(self, out_dir: Union[str, Path]) -> Path:
        """Write this run's records to <out_dir>/run.log

        Replaces the run log of a previous call in the same process.
        """
        self.detach_run_log()
        path = Path(out_dir) / "run.log"
        handler = logging.FileHandler(path, mode='w', encoding='utf-8')
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter(FILE_FORMAT))
        self.logger.addHandler(handler)
        self._run_handler = handler
        return path

    def detach_run_log(self):
        if self._run_handler is not None:
            self.logger.removeHandler(self._run_handler)
            self._run_handler.close()
            self._run_handler = None

    def debug(self, message: str):
        """Log debug message"""
        self.logger.debug(message)

    def info(self, message: str):
        """Log info message"""
        self.logger.info(message)

    def warning(self, message: str):
        """Log warning message"""
        self.logger.warning(message)

    def error(self, message: str):
        """Log error message"""
        self.logger.error(message)

    def exception(self, message: str):
        """Log exception with traceback"""
        self.logger.exception(message)

    def set_level(self, level: str):
        """Set console verbosity

        Args:
            level: Logging level ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')
        """
        numeric_level = getattr(logging, level.upper(), None)
        if not isinstance(numeric_level, int):
            raise ValueError(f'Invalid log level: {level}')
        for handler in self.logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
                handler.setLevel(numeric_level)


# Global logger instance
logger = AppLogger()
