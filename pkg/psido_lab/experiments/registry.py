"""
Experiment registry.

Maps experiment kinds to their implementations.
"""

import logging

from psido_lab.experiments.base import Experiment

logger = logging.getLogger(__name__)


class ExperimentRegistry:
    """
    Registry of experiment kinds.

    Handles registration and lookup of experiments by kind.
    """

    def __init__(self):
        """Initialize an empty registry."""
        self.experiments: dict[str, Experiment] = {}

    def register(self, experiment: Experiment) -> bool:
        """
        Register an experiment.

        Args:
            experiment: Experiment to register

        Returns:
            True if registered successfully
        """
        if experiment.name in self.experiments:
            logger.warning(f"Experiment {experiment.name} already registered, overwriting")

        self.experiments[experiment.name] = experiment
        logger.debug(f"Registered experiment: {experiment.name}")
        return True

    def unregister(self, name: str) -> bool:
        """
        Unregister an experiment.

        Args:
            name: Kind to unregister

        Returns:
            True if unregistered successfully
        """
        if name not in self.experiments:
            logger.warning(f"Experiment {name} not registered")
            return False

        del self.experiments[name]
        logger.debug(f"Unregistered experiment: {name}")
        return True

    def get(self, name: str) -> Experiment | None:
        """
        Get a registered experiment.

        Args:
            name: Experiment kind

        Returns:
            Experiment or None if not found
        """
        return self.experiments.get(name)

    def require(self, name: str) -> Experiment:
        """
        Get a registered experiment or fail.

        Raises:
            ValueError: If the kind is not registered
        """
        experiment = self.get(name)
        if experiment is None:
            raise ValueError(f"Experiment not found: {name}")
        return experiment

    def list_experiments(self) -> list[dict[str, str]]:
        """
        List all registered experiments.

        Returns:
            List of experiment descriptions
        """
        return [
            {"name": name, "description": experiment.description}
            for name, experiment in self.experiments.items()
        ]


def default_registry() -> ExperimentRegistry:
    """Registry with every built-in experiment kind."""
    from psido_lab.experiments.calculus_checks import (
        CommutatorExperiment,
        TransposeCheckExperiment,
    )
    from psido_lab.experiments.spectral import CompactnessExperiment
    from psido_lab.experiments.sweeps import L2ConditionExperiment, WeakCompactnessExperiment
    from psido_lab.experiments.symbol_checks import ClassCheckExperiment, T1TraceExperiment

    registry = ExperimentRegistry()
    for experiment in (
        TransposeCheckExperiment(),
        CompactnessExperiment(),
        WeakCompactnessExperiment(),
        L2ConditionExperiment(),
        CommutatorExperiment(),
        ClassCheckExperiment(),
        T1TraceExperiment(),
    ):
        registry.register(experiment)
    return registry
