"""Experiment harness: configs, task runners and plots."""

from .config import ExperimentConfig, build_config, load_config_file
from .runner import (
    RunOutcome,
    derive_seed,
    run_cz_scaling,
    run_experiment,
    run_external_molecule,
    run_h2_curve,
    run_h2_noise,
)

__all__ = [
    "ExperimentConfig",
    "RunOutcome",
    "build_config",
    "derive_seed",
    "load_config_file",
    "run_cz_scaling",
    "run_experiment",
    "run_external_molecule",
    "run_h2_curve",
    "run_h2_noise",
]
