"""
Tests for process settings, logging setup and torch runtime helpers
"""
import logging

import pytest
import torch

from app.core.config import Settings
from app.core.logging_config import configure_logging
from app.core.runtime import resolve_dtype


def test_settings_read_prefixed_environment(monkeypatch):
    monkeypatch.setenv("LOUPE_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("LOUPE_THREADS", "2")
    s = Settings(_env_file=None)
    assert s.log_level == "DEBUG"
    assert s.threads == 2
    assert s.deterministic is True


def test_settings_reject_zero_threads(monkeypatch):
    monkeypatch.setenv("LOUPE_THREADS", "0")
    with pytest.raises(ValueError):
        Settings(_env_file=None)


def test_configure_logging_replaces_only_its_own_handler():
    root = logging.getLogger()
    before = list(root.handlers)
    level = root.level
    try:
        configure_logging("warning")
        configure_logging("debug")
        added = [h for h in root.handlers if h not in before]
        assert len(added) == 1
        assert all(h in root.handlers for h in before)
        assert root.level == logging.DEBUG
    finally:
        for h in root.handlers[:]:
            if h not in before:
                root.removeHandler(h)
        root.setLevel(level)


def test_resolve_dtype():
    assert resolve_dtype("float32") is torch.float32
    assert resolve_dtype("float64") is torch.float64
    with pytest.raises(ValueError):
        resolve_dtype("float16")
