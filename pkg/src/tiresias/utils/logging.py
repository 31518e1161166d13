"""
Structured logging for Tiresias.

Every module logs through structlog with a ``component`` bound at import
time; the experiment runner adds the running stage and config hash through
contextvars, so one JSON line per event carries enough to locate it in a run.
"""

import logging
import sys
from typing import Any

import numpy as np
import structlog
from structlog.typing import EventDict, Processor, WrappedLogger

APP_NAME = "tiresias"

# Arrays up to this size are logged inline, larger ones as a shape summary.
MAX_INLINE_ARRAY = 16


def add_app_context(logger: WrappedLogger, method_name: str, event_dict: EventDict) -> EventDict:
    """Tag the event with the application name."""
    event_dict["app"] = APP_NAME
    return event_dict


def _native(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        if value.size <= MAX_INLINE_ARRAY:
            return value.tolist()
        return {"shape": list(value.shape), "dtype": str(value.dtype)}
    if isinstance(value, tuple):
        return [_native(v) for v in value]
    return value


def numpy_to_native(logger: WrappedLogger, method_name: str, event_dict: EventDict) -> EventDict:
    """
    Replace numpy scalars and arrays by plain Python values.

    Numerical code hands ``np.float64``/``np.int64`` and small arrays to the
    logger; the JSON renderer would otherwise fall back to ``repr``.
    """
    for key, value in event_dict.items():
        event_dict[key] = _native(value)
    return event_dict


def _renderer(format_type: str) -> Processor:
    if format_type == "json":
        return structlog.processors.JSONRenderer()
    return structlog.dev.ConsoleRenderer()


def setup_logging(level: str = "INFO", format_type: str = "json") -> None:
    """
    Configure the stdlib root logger and structlog.

    Args:
        level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format_type: 'json' for one JSON object per line, 'text' for the console renderer

    Example:
        >>> setup_logging(level="DEBUG", format_type="text")
        >>> get_logger(__name__, component="CLI").info("run_start", stages=6)
    """
    numeric_level = getattr(logging, level.upper())
    logging.basicConfig(format="%(message)s", stream=sys.stdout, level=numeric_level)

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            add_app_context,
            numpy_to_native,
            _renderer(format_type),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(),
        cache_logger_on_first_use=False,
    )


def bind_stage(stage: str, config_hash: str) -> None:
    """Bind the running stage and config hash to every subsequent log event."""
    structlog.contextvars.bind_contextvars(stage=stage, config_hash=config_hash)


def clear_stage() -> None:
    """Drop stage context bound by :func:`bind_stage`."""
    structlog.contextvars.unbind_contextvars("stage", "config_hash")


def get_logger(name: str | None = None, **initial_values: Any) -> Any:  # type: ignore[misc]
    """
    Logger for a module, optionally with bound context.

    Example:
        >>> logger = get_logger(__name__, component="SpectralExtractor")
        >>> logger.info("peel_component", index=1, rate=0.9993)
    """
    logger = structlog.get_logger(name)
    return logger.bind(**initial_values) if initial_values else logger
