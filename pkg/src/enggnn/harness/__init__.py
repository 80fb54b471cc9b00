"""Benchmark harness: configuration, data I/O, experiment driver, CLI."""

from .config import ConfigError, DataConfig, ExperimentConfig, load_config, parse_config
from .experiment import (
    derive_seed,
    run_experiment,
    split_and_replicate,
    stratified_split,
)
from .io import load_edge_list, load_matrix, save_edge_list, save_matrix

__all__ = [
    "ConfigError",
    "DataConfig",
    "ExperimentConfig",
    "derive_seed",
    "load_config",
    "load_edge_list",
    "load_matrix",
    "parse_config",
    "run_experiment",
    "save_edge_list",
    "save_matrix",
    "split_and_replicate",
    "stratified_split",
]
