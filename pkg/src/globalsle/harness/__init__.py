"""Experiment orchestration: configuration, statistics, replicas and the CLI."""

from .cli import cli_main
from .config import ExperimentConfig, load_config, parse_config
from .experiments import estimate_connectivity, replica_seed, run_replicas
from .stats import KSResult, ResultTable, SlopeEstimate, driver_qv_slope, ks_two_sample, lattice_curve_to_halfplane, \
    lattice_qv_window

__all__ = ["cli_main", "ExperimentConfig", "load_config", "parse_config", "estimate_connectivity", "replica_seed",
           "run_replicas", "KSResult", "ResultTable", "SlopeEstimate", "driver_qv_slope", "ks_two_sample",
           "lattice_curve_to_halfplane", "lattice_qv_window"]
