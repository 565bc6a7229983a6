"""Hierarchical multi-process fusion for visual place recognition."""

from ._hmpf_core import (
    HmpfError,
    compute_gist,
    compute_hog,
    load_features,
    min_max_normalize,
    renormalize,
    run_experiment,
    save_features,
    standardize,
    validate_config,
    write_synthetic,
)

__all__ = [
    "HmpfError",
    "compute_gist",
    "compute_hog",
    "load_features",
    "min_max_normalize",
    "renormalize",
    "run_experiment",
    "save_features",
    "standardize",
    "validate_config",
    "write_synthetic",
]
