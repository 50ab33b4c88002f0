from app.services.masks.sampling import (
    weights_to_prob,
    prob_to_weights,
    sample_uniform_field,
    relaxed_threshold,
    binarize,
    expected_sparsity,
    sparsity,
    mask_from_probability,
    radial_density_profile,
)
from app.services.masks.benchmarks import (
    InfeasibleBudgetError,
    calibration_region,
    uniform_probability,
    uniform_mask,
    variable_density_probability,
    variable_density_mask,
    cartesian_mask,
    benchmark_mask,
)
from app.services.masks.export import write_pgm, read_pgm, read_mask_pgm

__all__ = [
    "weights_to_prob",
    "prob_to_weights",
    "sample_uniform_field",
    "relaxed_threshold",
    "binarize",
    "expected_sparsity",
    "sparsity",
    "mask_from_probability",
    "radial_density_profile",
    "InfeasibleBudgetError",
    "calibration_region",
    "uniform_probability",
    "uniform_mask",
    "variable_density_probability",
    "variable_density_mask",
    "cartesian_mask",
    "benchmark_mask",
    "write_pgm",
    "read_pgm",
    "read_mask_pgm",
]
