"""
Shared fixtures: seeded inputs, tiny configs and the --runslow switch.
"""
import json
import logging
import sys
from pathlib import Path

import pytest
import torch

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

from app.schemas.config import NetworkConfig, RunConfig, TrainingConfig  # noqa: E402
from app.services.data import generate_phantoms  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run acceptance-scale tests")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: acceptance-scale run, skipped without --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def _restore_root_logger():
    """Undo root-logger handlers/level installed by CLI runs so tests stay order-independent."""
    root = logging.getLogger()
    handlers = list(root.handlers)
    level = root.level
    yield
    for h in root.handlers[:]:
        if h not in handlers:
            root.removeHandler(h)
    for h in handlers:
        if h not in root.handlers:
            root.addHandler(h)
    root.setLevel(level)


@pytest.fixture
def generator():
    return torch.Generator().manual_seed(0)


@pytest.fixture
def tiny_net_config():
    return NetworkConfig(depth=2, base_channels=4)


@pytest.fixture
def tiny_training_config(tiny_net_config):
    return TrainingConfig(
        net=tiny_net_config,
        batch_size=8,
        max_epochs=3,
        patience=3,
        learning_rate=1e-2,
    )


@pytest.fixture
def tiny_dataset():
    return generate_phantoms(24, 16, 16, seed=3)


@pytest.fixture
def tiny_run_payload():
    """Run config JSON for a 16x16 phantom set and a two-level network."""
    return {
        "data": {"synthetic": {"n": 24, "height": 16, "width": 16, "seed": 3}},
        "training": {
            "batch_size": 8,
            "max_epochs": 2,
            "patience": 2,
            "learning_rate": 0.01,
            "net": {"depth": 2, "base_channels": 4},
        },
    }


@pytest.fixture
def tiny_config_file(tmp_path, tiny_run_payload):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(tiny_run_payload), encoding="utf-8")
    return path


@pytest.fixture
def tiny_run_config(tiny_run_payload):
    return RunConfig.model_validate(tiny_run_payload)
