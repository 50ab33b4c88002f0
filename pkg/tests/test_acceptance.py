"""
Acceptance-scale runs on the default synthetic setup (pytest --runslow)
"""
import numpy as np
import pytest

from app.schemas.config import RunConfig
from app.services.evaluation import UNET, ZERO_FILLED, EvaluationEntry, evaluate_suite, summarize
from app.services.data import generate_phantoms, split
from app.services.masks import benchmark_mask
from app.services.training import calibrate_lambda, count_monotonicity_violations, train_fixed_mask, train_loupe

SEEDS = (0, 1, 2)


def _splits(cfg: RunConfig):
    synth = cfg.data.synthetic
    return split(generate_phantoms(synth.n, synth.height, synth.width, synth.seed), cfg.data.split, cfg.data.split_seed)


def _seeded(cfg: RunConfig, seed: int) -> RunConfig:
    sampler = cfg.training.sampler.model_copy(update={"seed": seed})
    return cfg.model_copy(update={"training": cfg.training.model_copy(update={"seed": seed, "sampler": sampler})})


@pytest.fixture(scope="module")
def default_config():
    return RunConfig()


@pytest.fixture(scope="module")
def calibrated(default_config):
    train_set, val_set, _ = _splits(default_config)
    return calibrate_lambda(0.25, default_config.training, train_set, val_set, default_config.calibration)


@pytest.mark.slow
def test_calibration_hits_target_rate(calibrated, default_config):
    assert abs(calibrated.achieved_sparsity - 0.25) <= 0.02
    assert count_monotonicity_violations(calibrated.probes, default_config.calibration.monotone_tolerance) == 0


@pytest.mark.slow
def test_learned_mask_training_reaches_budget(calibrated, default_config):
    cfg = default_config.training.model_copy(update={"lambda_": calibrated.lambda_value})
    train_set, val_set, _ = _splits(default_config)
    result = train_loupe(train_set, val_set, cfg)
    assert abs(result.model.expected_sparsity() - 0.25) <= 0.05
    best = min(e.val_loss for e in result.history.epochs)
    assert best < result.history.initial_val_loss


@pytest.mark.slow
def test_learning_benefit_over_seeds(calibrated, default_config):
    rate = default_config.training.target_rate
    unet_uniform, zero_uniform, unet_optimized = [], [], []

    for seed in SEEDS:
        cfg = _seeded(default_config, seed)
        training = cfg.training.model_copy(update={"lambda_": calibrated.lambda_value})
        train_set, val_set, test_set = _splits(cfg)
        h, w = train_set.height, train_set.width

        uniform = benchmark_mask("uniform", h, w, rate, cfg.masks.resolved_calib(h, w), np.random.default_rng(seed))
        fixed = train_fixed_mask(uniform, train_set, val_set, training)
        loupe = train_loupe(train_set, val_set, training)
        probability = loupe.model.probability().detach()

        entries = [
            EvaluationEntry(method=ZERO_FILLED, mask_name="uniform", mask=uniform),
            EvaluationEntry(method=UNET, mask_name="uniform", mask=uniform, net=fixed.model.net),
            EvaluationEntry(method=UNET, mask_name="optimized", probability=probability, rate=rate, net=loupe.model.net),
        ]
        means = {(r.method, r.mask): r.mean_db for r in summarize(evaluate_suite(test_set, entries, seed))}
        zero_uniform.append(means[(ZERO_FILLED, "uniform")])
        unet_uniform.append(means[(UNET, "uniform")])
        unet_optimized.append(means[(UNET, "optimized")])

    assert np.mean(unet_uniform) - np.mean(zero_uniform) >= 3.0
    assert all(o >= u - 0.1 for o, u in zip(unet_optimized, unet_uniform))
    assert np.mean(unet_optimized) > np.mean(unet_uniform)
