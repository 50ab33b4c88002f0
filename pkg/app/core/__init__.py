"""
Core module for configuration, logging and torch runtime setup
"""
from .config import settings
from .logging_config import configure_logging
from .runtime import configure_torch, resolve_dtype

__all__ = [
    "settings",
    "configure_logging",
    "configure_torch",
    "resolve_dtype",
]
