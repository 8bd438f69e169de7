"""Scenario-driven verification experiments and reproducible reports."""

from .experiments import EXPERIMENTS, run_experiment
from .registry import CHECK_REGISTRY, EXPERIMENT_NAMES, all_check_ids
from .report import (
    CSV_COLUMNS,
    CheckRecord,
    EstimateRecord,
    Report,
    check_eq,
    check_ge,
    check_le,
)
from .scenario import Scenario, load_scenario, parse_scenario

__all__ = [
    "CHECK_REGISTRY",
    "CSV_COLUMNS",
    "CheckRecord",
    "EXPERIMENTS",
    "EXPERIMENT_NAMES",
    "EstimateRecord",
    "Report",
    "Scenario",
    "all_check_ids",
    "check_eq",
    "check_ge",
    "check_le",
    "load_scenario",
    "parse_scenario",
    "run_experiment",
]
