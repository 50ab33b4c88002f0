from app.services.data.phantoms import generate_phantoms
from app.services.data.splitting import EmptySplitError, split, split_indices, split_sizes
from app.services.data.repository import (
    DatasetFormatError,
    BadMagicError,
    UnsupportedVersionError,
    TruncatedFileError,
    DimensionOverflowError,
    save_dataset,
    load_dataset,
    export_image_pgm,
)

__all__ = [
    "generate_phantoms",
    "EmptySplitError",
    "split",
    "split_indices",
    "split_sizes",
    "DatasetFormatError",
    "BadMagicError",
    "UnsupportedVersionError",
    "TruncatedFileError",
    "DimensionOverflowError",
    "save_dataset",
    "load_dataset",
    "export_image_pgm",
]
