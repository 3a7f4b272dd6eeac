"""Synthetic experiments, image I/O and the command-line front end."""
from .config import ConfigError, parse_config, read_config
from .experiments import ExperimentConfig, experiment_csv, rows_to_csv, rpca_curves, run_experiment
from .generators import gen_lowrank, gen_mask, gen_outliers, gen_sparse_error, gen_subspaces, trial_seeds
from .pgm import PgmError, image_read, image_write

__all__ = [
    "ConfigError", "parse_config", "read_config", "ExperimentConfig", "experiment_csv", "rows_to_csv",
    "rpca_curves", "run_experiment", "gen_lowrank", "gen_mask", "gen_outliers", "gen_sparse_error",
    "gen_subspaces", "trial_seeds", "PgmError", "image_read", "image_write",
]
