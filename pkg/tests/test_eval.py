"""
Tests for PSNR, zero-filled reconstruction, the evaluation harness and summaries
"""
import csv
import math

import numpy as np
import pytest
import torch

from app.schemas.metrics import MetricsRecord
from app.services.evaluation import (
    UNET,
    ZERO_FILLED,
    EmptyReferenceError,
    EvaluationEntry,
    evaluate_suite,
    paired_differences,
    psnr,
    realize_mask,
    summarize,
    write_records_csv,
    write_summary_csv,
    zero_filled,
)
from app.services.kspace import ShapeMismatchError, dft2, idft2
from app.services.masks import cartesian_mask, prob_to_weights, uniform_mask, weights_to_prob
from app.services.recon_net import init_params, zero_head


def _image(seed: int, size: int = 8) -> torch.Tensor:
    return torch.rand((size, size), generator=torch.Generator().manual_seed(seed), dtype=torch.float64)


# ---- PSNR --------------------------------------------------------------------

def test_identical_images_are_exact():
    x = _image(0)
    assert psnr(x, x) == math.inf


def test_constant_offset_examples():
    gt = torch.zeros(4, 4, dtype=torch.float64)
    gt[0, 0] = 1.0
    assert psnr(gt + 0.1, gt) == pytest.approx(20.0)
    assert psnr(2 * gt + 0.1, 2 * gt) == pytest.approx(26.0206, abs=1e-4)


def test_psnr_errors():
    with pytest.raises(ShapeMismatchError):
        psnr(torch.zeros(4, 4), torch.ones(4, 5))
    with pytest.raises(EmptyReferenceError):
        psnr(torch.ones(4, 4), torch.zeros(4, 4))


def test_psnr_is_scale_consistent():
    gt = _image(1)
    recon = gt + 0.05 * _image(2)
    for c in (0.5, 3.0, 17.0):
        assert psnr(c * recon, c * gt) == pytest.approx(psnr(recon, gt), abs=1e-9)


def test_psnr_decreases_with_noise():
    gt = _image(3, 16)
    noise = torch.randn((16, 16), generator=torch.Generator().manual_seed(4), dtype=torch.float64)
    values = [psnr(gt + a * noise, gt) for a in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(a > b for a, b in zip(values, values[1:]))


# ---- zero-filled -------------------------------------------------------------

def test_zero_filled_extremes():
    x = _image(5)
    torch.testing.assert_close(zero_filled(x, torch.ones(8, 8, dtype=torch.float64)), x, atol=1e-10, rtol=0)
    assert zero_filled(x, torch.zeros(8, 8, dtype=torch.float64)).abs().max().item() == 0.0


def test_zero_filled_matches_composed_operators():
    x = _image(6)
    mask = uniform_mask(8, 8, 0.4, 0, np.random.default_rng(1))
    expected = idft2(dft2(x) * mask).abs()
    torch.testing.assert_close(zero_filled(x, mask), expected, atol=1e-12, rtol=0)


# ---- harness -----------------------------------------------------------------

def test_identity_entry_is_exact_or_near_exact(tiny_dataset, tiny_net_config):
    net = init_params(tiny_net_config, torch.Generator().manual_seed(0), torch.float64)
    zero_head(net)
    full = torch.ones(16, 16, dtype=torch.float64)
    entries = [
        EvaluationEntry(method=ZERO_FILLED, mask_name="full", mask=full),
        EvaluationEntry(method=UNET, mask_name="full", mask=full, net=net),
    ]
    records = evaluate_suite(tiny_dataset, entries, seed=0)
    assert len(records) == 2 * len(tiny_dataset)
    assert all(r.psnr_db > 100 for r in records)
    assert all(r.sparsity == 1.0 for r in records)


def test_record_count_order_and_determinism(tiny_dataset):
    masks = {
        "uniform": uniform_mask(16, 16, 0.25, 2, np.random.default_rng(0)),
        "cartesian": cartesian_mask(16, 16, 0.25, 2),
    }
    entries = [EvaluationEntry(method=ZERO_FILLED, mask_name=k, mask=m) for k, m in masks.items()]
    records = evaluate_suite(tiny_dataset, entries, seed=3)
    assert len(records) == len(entries) * len(tiny_dataset)
    keys = [(r.method, r.mask, r.image_index) for r in records]
    assert keys == sorted(keys)
    assert records == evaluate_suite(tiny_dataset, list(reversed(entries)), seed=3)
    assert all(r.seed == 3 for r in records)


def test_learned_masks_use_top_k_realisation(tiny_dataset):
    probs = torch.rand((16, 16), generator=torch.Generator().manual_seed(2), dtype=torch.float64)
    probs = weights_to_prob(prob_to_weights(probs.clamp(0.01, 0.99), 5.0), 5.0)
    entry = EvaluationEntry(method=ZERO_FILLED, mask_name="optimized", probability=probs, rate=0.25)
    mask = realize_mask(entry, seed=0)
    assert int(mask.sum().item()) == 64
    records = evaluate_suite(tiny_dataset, [entry], seed=0)
    assert all(r.sparsity == 0.25 for r in records)


def test_sampled_realisation_is_seeded():
    probs = torch.full((16, 16), 0.3, dtype=torch.float64)
    entry = EvaluationEntry(method=ZERO_FILLED, mask_name="optimized", probability=probs, rate=0.3)
    a = realize_mask(entry, seed=5, realization="sample")
    b = realize_mask(entry, seed=5, realization="sample")
    assert torch.equal(a, b)
    assert set(a.unique().tolist()) <= {0.0, 1.0}


def test_entry_requires_exactly_one_mask_source():
    with pytest.raises(ValueError):
        EvaluationEntry(method=ZERO_FILLED, mask_name="x")
    with pytest.raises(ValueError):
        EvaluationEntry(method=ZERO_FILLED, mask_name="x", probability=torch.zeros(4, 4))


def test_mask_grid_mismatch_rejected(tiny_dataset):
    entry = EvaluationEntry(method=ZERO_FILLED, mask_name="small", mask=torch.ones(8, 8))
    with pytest.raises(ShapeMismatchError):
        evaluate_suite(tiny_dataset, [entry], seed=0)


# ---- summaries ---------------------------------------------------------------

def _record(method: str, mask: str, index: int, value: float, seed: int = 0) -> MetricsRecord:
    return MetricsRecord(method=method, mask=mask, image_index=index, psnr_db=value, sparsity=0.25, seed=seed)


def test_summary_statistics():
    rows = summarize([_record("unet", "uniform", i, v) for i, v in enumerate((10.0, 20.0, 60.0))])
    assert len(rows) == 1
    assert rows[0].mean_db == pytest.approx(30.0)
    assert rows[0].median_db == pytest.approx(20.0)
    assert rows[0].std_db == pytest.approx(math.sqrt(((20 ** 2) + (10 ** 2) + (30 ** 2)) / 3))


def test_summary_single_and_pair():
    single = summarize([_record("a", "m", 0, 12.5)])[0]
    assert single.mean_db == single.median_db == 12.5 and single.std_db == 0.0
    pair = summarize([_record("a", "m", 0, 10.0), _record("a", "m", 1, 14.0)])[0]
    assert pair.mean_db == 12.0


def test_summary_groups_sorted_lexicographically():
    records = [_record("zero_filled", "uniform", 0, 1.0), _record("unet", "vardens", 0, 2.0), _record("unet", "cartesian", 0, 3.0)]
    assert [(r.method, r.mask) for r in summarize(records)] == [
        ("unet", "cartesian"), ("unet", "vardens"), ("zero_filled", "uniform"),
    ]


def test_summary_of_nothing_rejected():
    with pytest.raises(ValueError):
        summarize([])


def test_paired_differences():
    records = [
        _record("unet", "uniform", 0, 30.0), _record("unet", "uniform", 1, 32.0),
        _record("unet", "optimized", 0, 31.0), _record("unet", "optimized", 1, 35.0),
    ]
    (diff,) = paired_differences(records, ("unet", "uniform"))
    assert (diff.method, diff.mask, diff.n) == ("unet", "optimized", 2)
    assert diff.mean_diff_db == pytest.approx(2.0)
    assert diff.stderr_db == pytest.approx(1.0)


def test_paired_differences_match_seed_and_image():
    records = [
        _record("unet", "uniform", 0, 30.0, seed=0), _record("unet", "uniform", 0, 40.0, seed=1),
        _record("unet", "optimized", 0, 31.0, seed=0), _record("unet", "optimized", 0, 41.0, seed=1),
    ]
    (diff,) = paired_differences(records, ("unet", "uniform"))
    assert diff.n == 2 and diff.mean_diff_db == pytest.approx(1.0) and diff.stderr_db == pytest.approx(0.0)


def test_csv_outputs(tmp_path):
    records = [_record("zero_filled", "full", 0, math.inf), _record("unet", "uniform", 1, 27.5)]
    write_records_csv(records, tmp_path / "records.csv")
    write_summary_csv(summarize(records), tmp_path / "summary.csv")

    with open(tmp_path / "records.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["method", "mask", "image_index", "psnr_db", "sparsity", "seed"]
    assert rows[1][3] == "exact"
    assert float(rows[2][3]) == 27.5

    with open(tmp_path / "summary.csv", newline="", encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["method", "mask", "n", "mean_db", "median_db", "std_db"]
    assert rows[2][3] == "exact"


def test_summary_with_exact_reconstructions():
    records = [_record("zero_filled", "full", 0, math.inf), _record("zero_filled", "full", 1, 30.0),
               _record("zero_filled", "full", 2, 34.0)]
    (row,) = summarize(records)
    assert row.n == 3 and row.n_exact == 1
    assert row.mean_db == math.inf
    assert row.std_db == pytest.approx(2.0)

    (all_exact,) = summarize([_record("unet", "full", i, math.inf) for i in range(2)])
    assert all_exact.n_exact == 2 and all_exact.std_db == 0.0
