"""
psido-lab: numerical experiments with pseudodifferential operators

This package provides:
- Symbols in the vanishing class with analytic and finite-difference derivatives
- Truncated transpose expansions, symbol truncation and order reduction
- FFT application and dense assembly of operators on a torus
- Compactness diagnostics: bump sweeps, singular value tails, T(1) traces
- A config-driven experiment runner with CSV and JSON reports
"""

__version__ = "0.1.0"

from psido_lab.config import parse_config
from psido_lab.discretization import Grid, GridFunction, OperatorMatrix
from psido_lab.factory import build_symbol
from psido_lab.runner import emit_report, run_experiment
from psido_lab.schema.schema import ExperimentConfig, RunManifest
from psido_lab.symbols.base import Symbol

__all__ = [
    "parse_config",
    "Grid",
    "GridFunction",
    "OperatorMatrix",
    "build_symbol",
    "emit_report",
    "run_experiment",
    "ExperimentConfig",
    "RunManifest",
    "Symbol",
]
