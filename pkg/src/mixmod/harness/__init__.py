"""Experiment configuration, test families, baselines and the CLI."""
from .baseline import Baseline, Row
from .config import ExperimentConfig, PropertyParams, load_config
from .families import FamilySpec, make_family
from .suites import CSV_COLUMNS, SelfCheckError, SuiteResult, build_rows, run_suite, selfcheck

__all__ = ["Baseline", "Row", "ExperimentConfig", "PropertyParams", "load_config", "FamilySpec",
           "make_family", "CSV_COLUMNS", "SelfCheckError", "SuiteResult", "build_rows", "run_suite",
           "selfcheck"]
