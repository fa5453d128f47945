"""
Structured logging configuration for the PUCS simulator.

Uses structlog for JSON logging in batch/production runs and console
rendering for interactive use.

Usage:
    from src.utils.logging import setup_logging, get_logger

    # At CLI startup
    setup_logging(environment="development", log_level="DEBUG")

    # In any module
    logger = get_logger()
    log = logger.bind(algo="olpa", seed=3)
    log.info("run_started", horizon=3000)
"""

import logging
import sys
from typing import Optional

import structlog
from structlog.contextvars import merge_contextvars


# =============================================================================
# LOG LEVEL CONFIGURATION BY LAYER
# =============================================================================
# | Layer      | Default Level | What to Log                                |
# |------------|---------------|--------------------------------------------|
# | CLI        | INFO          | Command start/finish, artifacts written     |
# | Harness    | INFO          | Experiment cells started/finished, oracle  |
# | Policies   | DEBUG         | Per-round probe sets and assignments       |
# | Probing    | DEBUG         | Greedy stages, expectation method chosen   |
# | Ingest     | INFO          | Rows parsed/dropped, cells built, clamps   |
# =============================================================================

# PUCS_LOG values accepted on the command line
PUCS_LOG_LEVELS = {"error": "ERROR", "info": "INFO", "debug": "DEBUG"}


def resolve_log_level(value: Optional[str]) -> str:
    """
    Map a PUCS_LOG value (error, info, debug) or a logging level name
    to a logging level name. Unknown values resolve to INFO.
    """
    if not value:
        return "INFO"
    lowered = value.strip().lower()
    if lowered in PUCS_LOG_LEVELS:
        return PUCS_LOG_LEVELS[lowered]
    upper = value.strip().upper()
    if upper in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        return upper
    return "INFO"


def setup_logging(
    environment: str = "development",
    log_level: str = "INFO",
    json_output: Optional[bool] = None,
) -> None:
    """
    Configure structured logging for the application.

    Args:
        environment: "development", "testing", or "production"
        log_level: Root log level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
            or a PUCS_LOG value (error, info, debug)
        json_output: Force JSON output if True, console if False.
                     Defaults to JSON for production, console otherwise.
    """
    use_json = json_output if json_output is not None else (environment == "production")

    numeric_level = getattr(logging, resolve_log_level(log_level), logging.INFO)

    # Logs go to stderr so stdout stays clean for command reports
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=numeric_level,
    )

    # Order matters: earlier processors run first
    processors = [
        _add_environment_context(environment),
        merge_contextvars,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.add_log_level,
        structlog.processors.CallsiteParameterAdder(
            parameters=[
                structlog.processors.CallsiteParameter.MODULE,
                structlog.processors.CallsiteParameter.FUNC_NAME,
            ]
        ),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
    ]

    if use_json:
        processors.append(structlog.processors.JSONRenderer())
    else:
        processors.append(structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()))

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _add_environment_context(environment: str):
    """Processor that adds the environment name to every log entry."""

    def processor(logger, method_name, event_dict):
        event_dict["environment"] = environment
        return event_dict

    return processor


def get_logger(name: Optional[str] = None) -> structlog.BoundLogger:
    """
    Get a structured logger instance.

    Example:
        log = get_logger().bind(algo="gr")
        log.debug("round_completed", t=12, probe_set=[0, 2])
    """
    return structlog.get_logger(name)
