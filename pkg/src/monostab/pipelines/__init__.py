"""Scripted experiments with JSON configs and CSV/JSON reports."""
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, from_dict, load
from .experiments import RUNNERS, run
from .report import Report

__all__ = ["EXPERIMENTS", "ConfigError", "ExperimentConfig", "from_dict", "load", "RUNNERS", "run", "Report"]
