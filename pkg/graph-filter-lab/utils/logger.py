import logging
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Union

from config import Config


class Logger:
    """Custom logger class for the graph filter lab"""

    def __init__(self, name: str = "graph_filter_lab", level: str = Config.LOG_LEVEL,
                 log_dir: Union[str, Path] = Config.LOG_DIR):
        self.log_dir = log_dir
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, str(level).upper(), logging.INFO))

        # Prevent duplicate handlers
        if not self.logger.handlers:
            self._setup_handlers()

    def _setup_handlers(self):
        """Setup console and file handlers"""
        # Console handler; stdout carries CSV/JSON artifacts
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(logging.INFO)
        console_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        ))
        self.logger.addHandler(console_handler)

        # File handler (optional)
        log_file = Path(self.log_dir) / 'graph_filter_lab.log'
        try:
            try:
                file_handler = self._file_handler(log_file)
            except FileNotFoundError:
                # Create logs directory if it doesn't exist
                log_file.parent.mkdir(parents=True, exist_ok=True)
                file_handler = self._file_handler(log_file)
            self.logger.addHandler(file_handler)
        except OSError as e:
            self.logger.warning(f"File logging disabled, console only: cannot open {log_file}: {e}")

    @staticmethod
    def _file_handler(log_file: Path) -> RotatingFileHandler:
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
        ))
        return file_handler

    def info(self, message: str):
        """Log info message"""
        self.logger.info(message)

    def error(self, message: str):
        """Log error message"""
        self.logger.error(message)

    def warning(self, message: str):
        """Log warning message"""
        self.logger.warning(message)

    def debug(self, message: str):
        """Log debug message"""
        self.logger.debug(message)

    def log_run_stats(self, stats: dict):
        """Log run statistics"""
        self.info(f"Run Statistics: {stats}")

    def log_error_with_context(self, error: Exception, context: Union[str, dict] = ""):
        """Log error with context"""
        error_msg = f"Error in {context}: {str(error)}" if context else str(error)
        self.error(error_msg)


# Global logger instance
logger = Logger()
