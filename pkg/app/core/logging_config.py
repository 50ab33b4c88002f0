"""
Logging Configuration
"""
import logging
from typing import Optional

from app.core.config import settings

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class _LoupeHandler(logging.StreamHandler):
    pass


def configure_logging(level: Optional[str] = None) -> None:
    """
    Install one stream handler on the root logger, replacing a previous one
    from this function but leaving other handlers alone.

    Args:
        level: Log level name; defaults to settings.log_level
    """
    resolved = (level or settings.log_level).upper()
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, _LoupeHandler):
            root.removeHandler(handler)

    handler = _LoupeHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel(resolved)
