"""
Tests for phantom generation, dataset splitting and the LPTD file format
"""
import struct

import numpy as np
import pytest
import torch
from pydantic import ValidationError

from app.schemas.dataset import Dataset
from app.services.data import (
    BadMagicError,
    DatasetFormatError,
    DimensionOverflowError,
    EmptySplitError,
    TruncatedFileError,
    UnsupportedVersionError,
    export_image_pgm,
    generate_phantoms,
    load_dataset,
    save_dataset,
    split,
    split_indices,
    split_sizes,
)
from app.services.data.repository import decode_dataset, encode_dataset
from app.services.kspace import dft2
from app.services.masks import read_pgm


def test_generation_is_deterministic():
    a = generate_phantoms(5, 32, 32, seed=11)
    b = generate_phantoms(5, 32, 32, seed=11)
    assert np.array_equal(a.images, b.images)
    assert not np.array_equal(a.images, generate_phantoms(5, 32, 32, seed=12).images)


def test_images_normalised_per_image():
    ds = generate_phantoms(10, 32, 48, seed=0)
    assert ds.images.shape == (10, 32, 48)
    assert ds.images.dtype == np.float32
    assert ds.images.min() >= 0.0
    np.testing.assert_array_equal(ds.images.reshape(10, -1).max(axis=1), np.ones(10, dtype=np.float32))


def test_generated_images_valid_over_many_seeds():
    for seed in range(100):
        ds = generate_phantoms(1, 16, 16, seed=seed)
        assert np.isfinite(ds.images).all()
        assert 0.0 <= ds.images.min() and ds.images.max() == 1.0


def test_phantom_spectra_are_compact():
    ds = generate_phantoms(200, 64, 64, seed=7)
    energy = dft2(torch.from_numpy(ds.images).to(torch.float64)).abs() ** 2
    centre = energy[:, 16:48, 16:48].sum(dim=(1, 2))
    fraction = centre / energy.sum(dim=(1, 2))
    assert fraction.mean().item() >= 0.95


@pytest.mark.parametrize("n,side", [(0, 16), (3, 15)])
def test_invalid_generation_arguments(n, side):
    with pytest.raises(ValueError):
        generate_phantoms(n, side, side, seed=0)


def test_dataset_invariants_enforced():
    with pytest.raises(ValidationError):
        Dataset(images=np.full((1, 4, 4), 1.5, dtype=np.float32))
    with pytest.raises(ValidationError):
        Dataset(images=np.full((1, 4, 4), np.nan, dtype=np.float32))
    with pytest.raises(ValidationError):
        Dataset(images=np.zeros((4, 4), dtype=np.float32))
    with pytest.raises(ValidationError):
        Dataset(images=np.zeros((0, 4, 4), dtype=np.float32))


def test_split_sizes_follow_floor_and_remainder():
    assert split_sizes(100, (0.6, 0.2, 0.2)) == (60, 20, 20)
    assert split_sizes(512, (0.7, 0.15, 0.15)) == (360, 76, 76)


@pytest.mark.parametrize("fractions", [(1.0, 0.0, 0.0), (0.5, 0.5), (0.5, 0.3, 0.3)])
def test_invalid_fractions_rejected(fractions):
    with pytest.raises(EmptySplitError):
        split_sizes(100, fractions)


def test_split_too_small_for_a_nonempty_test_set():
    with pytest.raises(EmptySplitError):
        split_sizes(3, (0.7, 0.15, 0.15))


def test_split_is_disjoint_exhaustive_and_seeded():
    train, val, test = split_indices(100, (0.6, 0.2, 0.2), seed=4)
    union = np.concatenate([train, val, test])
    assert sorted(union.tolist()) == list(range(100))
    again = split_indices(100, (0.6, 0.2, 0.2), seed=4)
    for a, b in zip((train, val, test), again):
        assert np.array_equal(a, b)


def test_split_datasets(tiny_dataset):
    train, val, test = split(tiny_dataset, (0.7, 0.15, 0.15), seed=0)
    assert (len(train), len(val), len(test)) == (18, 3, 3)
    assert train.height == tiny_dataset.height


def test_lptd_round_trip_is_bitwise(tmp_path):
    ds = generate_phantoms(4, 16, 24, seed=1)
    path = save_dataset(ds, tmp_path / "d.lptd")
    blob = path.read_bytes()
    assert blob[:4] == b"LPTD"
    assert struct.unpack_from("<IIII", blob, 4) == (1, 4, 16, 24)
    assert len(blob) == 20 + 4 * 16 * 24 * 4

    loaded = load_dataset(path)
    assert loaded.images.tobytes() == ds.images.tobytes()
    assert encode_dataset(loaded) == blob


def _header(version=1, count=2, height=4, width=4, magic=b"LPTD") -> bytes:
    return struct.pack("<4sIIII", magic, version, count, height, width)


def test_corrupted_files_raise_distinct_errors():
    payload = np.zeros(2 * 4 * 4, dtype="<f4").tobytes()
    with pytest.raises(BadMagicError):
        decode_dataset(_header(magic=b"LPNW") + payload)
    with pytest.raises(UnsupportedVersionError):
        decode_dataset(_header(version=2) + payload)
    with pytest.raises(TruncatedFileError):
        decode_dataset(_header(count=3) + payload)
    with pytest.raises(TruncatedFileError):
        decode_dataset(b"LPTD\x01\x00")
    with pytest.raises(DimensionOverflowError):
        decode_dataset(_header(count=2 ** 16, height=2 ** 16, width=1))
    with pytest.raises(DimensionOverflowError):
        decode_dataset(_header(count=0) + payload)


def test_trailing_bytes_rejected():
    payload = np.zeros(2 * 4 * 4, dtype="<f4").tobytes()
    with pytest.raises(DatasetFormatError):
        decode_dataset(_header() + payload + b"\x00")


def test_export_image_pgm(tmp_path, tiny_dataset):
    path = export_image_pgm(tiny_dataset, 2, tmp_path / "img.pgm")
    levels = read_pgm(path)
    expected = np.rint(255 * tiny_dataset.images[2].astype(np.float64)) / 255
    np.testing.assert_allclose(levels, expected)


def test_out_of_range_pixels_rejected_as_format_error():
    payload = np.full(2 * 4 * 4, 2.0, dtype="<f4").tobytes()
    with pytest.raises(DatasetFormatError):
        decode_dataset(_header() + payload)
