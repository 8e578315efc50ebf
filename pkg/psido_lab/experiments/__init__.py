"""Experiment kinds and their registry."""

from psido_lab.experiments.base import (
    MAIN_TABLE,
    Experiment,
    ExperimentContext,
    Verdicts,
)
from psido_lab.experiments.registry import ExperimentRegistry, default_registry

__all__ = [
    "MAIN_TABLE",
    "Experiment",
    "ExperimentContext",
    "Verdicts",
    "ExperimentRegistry",
    "default_registry",
]
