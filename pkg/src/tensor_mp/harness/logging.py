"""Structured JSON logging for experiment runs."""

import json
import logging
import logging.handlers
import sys
import traceback
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

LOGGER_NAME = "tensor_mp"


class StructuredFormatter(logging.Formatter):
    """JSON formatter for structured logs."""

    def format(self, record):
        log_entry = {
            "timestamp": datetime.fromtimestamp(
                record.created, timezone.utc
            ).isoformat(),
            "level": record.levelname,
            "message": record.getMessage(),
            "module": record.module,
            "funcName": record.funcName,
            "lineno": record.lineno,
        }
        if hasattr(record, "details"):
            log_entry["details"] = record.details
        return json.dumps(log_entry, default=str)


class ExperimentLogger:
    """
    Structured event logger for experiments, writing JSON lines to stderr and,
    when a log directory is given, to a rotating file.
    """

    def __init__(self, log_level: str = "INFO", log_dir: Optional[Path] = None):
        self.logger = logging.getLogger(LOGGER_NAME)
        self.logger.setLevel(getattr(logging, log_level.upper()))
        self.logger.propagate = False
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(StructuredFormatter())
        self.logger.addHandler(console_handler)

        self.log_dir = log_dir
        if log_dir is not None:
            log_dir.mkdir(parents=True, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                log_dir / "tensor_mp.log", maxBytes=10 * 1024 * 1024, backupCount=5
            )
            file_handler.setFormatter(StructuredFormatter())
            self.logger.addHandler(file_handler)

    def log_event(
        self,
        level: str,
        event: str,
        details: Optional[Dict[str, Any]] = None,
        error: Optional[BaseException] = None,
    ) -> None:
        """
        Log structured event.

        Args:
            level: Log level (DEBUG, INFO, WARNING, ERROR).
            event: Event name, e.g. ``experiment.start``.
            details: Additional context.
            error: Exception to attach, with its traceback.
        """
        payload: Dict[str, Any] = dict(details or {})
        if error is not None:
            payload["error"] = str(error)
            payload["error_type"] = type(error).__name__
            payload["traceback"] = "".join(
                traceback.format_exception(type(error), error, error.__traceback__)
            )
        self.logger.log(
            getattr(logging, level.upper()), event, extra={"details": payload}
        )

    def error(
        self,
        event: str,
        error: BaseException,
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        self.log_event("ERROR", event, details, error)

    def warning(self, event: str, details: Optional[Dict[str, Any]] = None) -> None:
        self.log_event("WARNING", event, details)

    def info(self, event: str, details: Optional[Dict[str, Any]] = None) -> None:
        self.log_event("INFO", event, details)


# Global instance
_logger: Optional[ExperimentLogger] = None


def configure_logging(
    log_level: str = "INFO", log_dir: Optional[Path] = None
) -> ExperimentLogger:
    """(Re)build the global experiment logger."""
    global _logger
    _logger = ExperimentLogger(log_level, log_dir)
    return _logger


def get_logger() -> ExperimentLogger:
    global _logger
    if _logger is None:
        _logger = ExperimentLogger()
    return _logger
