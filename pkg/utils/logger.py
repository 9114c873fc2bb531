"""
Logging configuration for the bpa command line.

Logs go to stderr and optionally to a file; stdout carries verdicts and
reports only. The game engine, the solver and the normed decision procedure
log key/value events through structlog, everything else through the standard
library. In JSON mode both kinds are rendered by the same structlog chain.
"""

import logging
import sys
from pathlib import Path
from typing import Any, List, Optional

import coloredlogs
import structlog

CONSOLE_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"

LEVEL_STYLES = {
    "debug": {"color": "cyan"},
    "info": {"color": "green"},
    "warning": {"color": "yellow"},
    "error": {"color": "red"},
    "critical": {"color": "red", "bold": True},
}

FIELD_STYLES = {
    "asctime": {"color": "blue"},
    "name": {"color": "magenta"},
    "levelname": {"color": "white", "bold": True},
}


def _event_metadata() -> List[Any]:
    return [
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
    ]


def _json_formatter() -> logging.Formatter:
    return structlog.stdlib.ProcessorFormatter(
        processors=[
            structlog.stdlib.ProcessorFormatter.remove_processors_meta,
            structlog.processors.JSONRenderer(sort_keys=True),
        ],
        foreign_pre_chain=_event_metadata(),
    )


def setup_logging(
    level: str = "WARNING",
    log_file: Optional[Path] = None,
    json_logs: bool = False,
) -> None:
    """
    Set up logging configuration.

    Args:
        level: Log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file path
        json_logs: Render every record, structlog or not, as one JSON object
    """
    log_level = getattr(logging, level.upper())

    processors: List[Any] = [
        structlog.stdlib.filter_by_level,
        structlog.stdlib.PositionalArgumentsFormatter(),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]
    if json_logs:
        processors[1:1] = _event_metadata()
        processors.append(structlog.stdlib.ProcessorFormatter.wrap_for_formatter)
        formatter = _json_formatter()
    else:
        # coloredlogs adds time, level and logger name around the rendered event
        processors.append(structlog.dev.ConsoleRenderer(colors=False))
        formatter = logging.Formatter(CONSOLE_FORMAT)

    structlog.configure(
        processors=processors,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    if json_logs:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        root_logger.addHandler(console_handler)
    else:
        coloredlogs.install(
            level=log_level,
            stream=sys.stderr,
            fmt=CONSOLE_FORMAT,
            level_styles=LEVEL_STYLES,
            field_styles=FIELD_STYLES,
        )

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)
