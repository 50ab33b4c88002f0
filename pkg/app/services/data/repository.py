"""
Dataset Repository
LPTD binary dataset files and per-image PGM export.

Layout (little-endian): magic "LPTD" (4 bytes), version u32, count u32,
height u32, width u32, then count*height*width f32 values, image-major and
row-major within an image.
"""
import logging
import struct
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from app.schemas.dataset import Dataset
from app.services.masks.export import write_pgm

logger = logging.getLogger(__name__)

MAGIC = b"LPTD"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sIIII")
MAX_ELEMENTS = 2 ** 31
VALUE_DTYPE = np.dtype("<f4")

PathLike = Union[str, Path]


class DatasetFormatError(Exception):
    """Raised when an LPTD file cannot be decoded"""
    pass


class BadMagicError(DatasetFormatError):
    """Raised when the file does not start with the LPTD magic"""
    pass


class UnsupportedVersionError(DatasetFormatError):
    """Raised for an unknown format version"""
    pass


class TruncatedFileError(DatasetFormatError):
    """Raised when the file is shorter than its header declares"""
    pass


class DimensionOverflowError(DatasetFormatError):
    """Raised when declared dimensions are zero or exceed the supported element count"""
    pass


def encode_dataset(ds: Dataset) -> bytes:
    """Serialise a dataset to LPTD bytes."""
    count, height, width = ds.images.shape
    header = HEADER.pack(MAGIC, FORMAT_VERSION, count, height, width)
    return header + ds.images.astype(VALUE_DTYPE, copy=False).tobytes(order="C")


def decode_dataset(blob: bytes) -> Dataset:
    """
    Parse LPTD bytes.

    Args:
        blob: File contents

    Returns:
        Dataset

    Raises:
        BadMagicError, UnsupportedVersionError, TruncatedFileError, DimensionOverflowError
    """
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagicError("bad magic: not an LPTD dataset file")
    if len(blob) < HEADER.size:
        raise TruncatedFileError(f"header needs {HEADER.size} bytes, file has {len(blob)}")

    _, version, count, height, width = HEADER.unpack_from(blob)
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"unsupported LPTD version {version}")
    if count == 0 or height == 0 or width == 0:
        raise DimensionOverflowError(f"degenerate dimensions {count}x{height}x{width}")
    n_values = count * height * width
    if n_values > MAX_ELEMENTS:
        raise DimensionOverflowError(f"declared {n_values} values exceeds the limit of {MAX_ELEMENTS}")

    expected = HEADER.size + n_values * VALUE_DTYPE.itemsize
    if len(blob) < expected:
        raise TruncatedFileError(f"declared {count} images need {expected} bytes, file has {len(blob)}")
    if len(blob) > expected:
        raise DatasetFormatError(f"{len(blob) - expected} trailing bytes after the declared images")

    values = np.frombuffer(blob, dtype=VALUE_DTYPE, count=n_values, offset=HEADER.size)
    images = values.reshape(count, height, width).astype(np.float32)
    try:
        return Dataset(images=images, generator="lptd", seed=0)
    except ValidationError as e:
        raise DatasetFormatError(f"invalid pixel values: {e}")


def save_dataset(ds: Dataset, path: PathLike) -> Path:
    """
    Write a dataset as an LPTD file.

    Args:
        ds: Dataset to store
        path: Destination file

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_dataset(ds))
    logger.info("wrote %d images to %s", len(ds), path)
    return path


def load_dataset(path: PathLike) -> Dataset:
    """
    Read an LPTD file.

    Args:
        path: Source file

    Returns:
        Dataset

    Raises:
        OSError: If the file cannot be read
        DatasetFormatError: If the contents are malformed
    """
    return decode_dataset(Path(path).read_bytes())


def export_image_pgm(ds: Dataset, index: int, path: PathLike) -> Path:
    """Write one dataset image as an 8-bit PGM with levels round(255 * v)."""
    return write_pgm(ds.images[index], path)
