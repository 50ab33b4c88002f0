"""
Command Helpers
Exit codes, exception translation, and config/data plumbing shared by all commands.
"""
import argparse
import logging
from pathlib import Path
from typing import Callable, Optional, Tuple

from pydantic import ValidationError

from app.schemas.config import ConfigError, RunConfig, dump_run_config, load_run_config
from app.schemas.dataset import Dataset
from app.services.checkpoint_repository import CheckpointFormatError
from app.services.data import DatasetFormatError, generate_phantoms, load_dataset, split
from app.services.training import CalibrationError, DivergenceError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_DIVERGENCE = 4
EXIT_CALIBRATION = 5

RESOLVED_CONFIG = "resolved_config.json"

Handler = Callable[[argparse.Namespace], int]


class UsageError(Exception):
    """Raised for invalid command arguments that argparse cannot check"""
    pass


def run_guarded(handler: Handler, args: argparse.Namespace) -> int:
    """
    Run a command handler and translate domain exceptions into exit codes.

    Args:
        handler: Command implementation
        args: Parsed arguments

    Returns:
        Process exit code
    """
    try:
        return handler(args)
    except DivergenceError as e:
        print(f"❌ Training diverged: {e}")
        return EXIT_DIVERGENCE
    except CalibrationError as e:
        print(f"❌ Calibration failed: {e}")
        return EXIT_CALIBRATION
    except (DatasetFormatError, CheckpointFormatError) as e:
        print(f"❌ Unreadable file: {e}")
        return EXIT_IO
    except OSError as e:
        print(f"❌ I/O error: {e}")
        return EXIT_IO
    except (ConfigError, UsageError, ValidationError, ValueError) as e:
        print(f"❌ Invalid input: {e}")
        return EXIT_USAGE


def load_config(path: Optional[str], output_dir: Optional[str] = None) -> RunConfig:
    """Load a run config and apply an --out override of output_dir."""
    cfg = load_run_config(path)
    if output_dir is not None:
        cfg = cfg.model_copy(update={"output_dir": output_dir})
    return cfg


def prepare_output(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def echo_config(cfg: RunConfig, out: Path) -> Path:
    """Write the fully resolved config next to the run outputs."""
    path = out / RESOLVED_CONFIG
    dump_run_config(cfg, path)
    return path


def load_source(cfg: RunConfig) -> Dataset:
    """The configured dataset file, or a synthetic phantom set when no path is set."""
    if cfg.data.path:
        logger.info("loading dataset %s", cfg.data.path)
        return load_dataset(cfg.data.path)
    synth = cfg.data.synthetic
    logger.info("synthesising %d phantoms of %dx%d (seed %d)", synth.n, synth.height, synth.width, synth.seed)
    return generate_phantoms(synth.n, synth.height, synth.width, synth.seed)


def load_splits(cfg: RunConfig) -> Tuple[Dataset, Dataset, Dataset]:
    """Train/validation/test split of the configured dataset."""
    return split(load_source(cfg), cfg.data.split, cfg.data.split_seed)
