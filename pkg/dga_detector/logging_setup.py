"""
Logging configuration for the command-line tools.

Library modules only call logging.getLogger(); handlers are installed here, once,
by the CLI.
"""

import logging
import os
import sys

LOGGER_NAME = "DgaDetector"

FULL_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
SHORT_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"


def get_logger(component: str = "") -> logging.Logger:
    """Return the package logger, or a child logger for one component."""
    if component:
        return logging.getLogger(f"{LOGGER_NAME}.{component}")
    return logging.getLogger(LOGGER_NAME)


def configure_logging(verbose: bool = False) -> logging.Logger:
    """
    Install stderr (and optional file) handlers on the root logger.

    DGA_QUIET=true keeps only warnings with the short format, the way a batch
    job in the background would want it. DGA_LOG_FILE adds a file handler.
    """
    quiet = os.getenv("DGA_QUIET", "false").lower() == "true"
    log_file = os.getenv("DGA_LOG_FILE")

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    if quiet and not verbose:
        level, fmt = logging.WARNING, SHORT_FORMAT
    else:
        level, fmt = (logging.DEBUG if verbose else logging.INFO), FULL_FORMAT

    logging.basicConfig(level=level, format=fmt, handlers=handlers, force=True)
    return get_logger()
