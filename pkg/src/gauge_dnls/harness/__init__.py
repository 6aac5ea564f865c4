"""Experiment configs, runners, reports, the acceptance gate and the CLI."""

from .config import KINDS, ConfigError, ExperimentConfig, InitialData, load_config
from .experiments import run
from .gate import CRITERIA, run_gate
from .report import Report

__all__ = ["CRITERIA", "KINDS", "ConfigError", "ExperimentConfig", "InitialData", "Report", "load_config", "run", "run_gate"]
