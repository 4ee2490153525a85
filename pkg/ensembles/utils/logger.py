import os
import sys
from typing import Optional

from loguru import logger

from ensembles.config import settings


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None) -> None:
    """Route loguru output to stderr and, optionally, to a rotating file.

    Stdout is reserved for command output, so the default sink is replaced.
    """
    logger.remove()
    logger.add(sys.stderr, level=(level or settings.LOG_LEVEL).upper())

    log_file = log_file or settings.LOG_FILE
    if log_file:
        directory = os.path.dirname(log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        logger.add(log_file, rotation="1 day", retention="30 days", level="DEBUG")
