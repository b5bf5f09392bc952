"""Experiment orchestration, analysis and the command-line interface."""
from sbstdp.harness.analysis import IncompleteDataset, StatsReport, analyze, analyze_rows
from sbstdp.harness.config import ConfigError, ExperimentConfig
from sbstdp.harness.experiment import ExperimentResult, run_cell, run_experiment

__all__ = [
    "ConfigError", "ExperimentConfig", "ExperimentResult", "IncompleteDataset",
    "StatsReport", "analyze", "analyze_rows", "run_cell", "run_experiment",
]
