"""
Base class for experiments.

An experiment turns a validated ExperimentConfig into CSV tables, assertion verdicts
and a scalar summary. Each experiment kind declares its table columns and the
assertion names it understands.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from psido_lab.diagnostics import BumpFunction, make_bump
from psido_lab.discretization import Grid, OperatorMatrix
from psido_lab.logger import RunLogger
from psido_lab.schema.schema import AssertionVerdict, ExperimentConfig, ExperimentResult
from psido_lab.symbols.base import Symbol

logger = logging.getLogger(__name__)

MAIN_TABLE = "main"


@dataclass
class ExperimentContext:
    """Everything an experiment needs for one run."""

    config: ExperimentConfig
    grid: Grid
    symbol: Symbol
    run_logger: RunLogger
    output_dir: Path
    file_prefix: str
    exported: list[Path] = field(default_factory=list)

    @property
    def seed(self) -> int:
        return self.config.seed or 0

    @property
    def jobs(self) -> int:
        return self.config.jobs

    @property
    def safe_radius(self) -> float:
        return self.config.grid.resolved_safe_radius

    @property
    def size_cap(self) -> int:
        return self.config.grid.size_cap

    def bumps(self) -> tuple[BumpFunction, BumpFunction]:
        """φ1 and φ2 from the bump spec."""
        spec = self.config.bumps
        d = self.grid.dimension
        phi1 = make_bump(spec.order, spec.profile, d, spec.resolution)
        second = spec.second_profile or spec.profile
        phi2 = phi1 if second == spec.profile else make_bump(spec.order, second, d, spec.resolution)
        return phi1, phi2

    def offsets(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """x1 and x2 (zero when not configured)."""
        d = self.grid.dimension
        spec = self.config.bumps
        x1 = tuple(spec.x1) if spec.x1 else (0.0,) * d
        x2 = tuple(spec.x2) if spec.x2 else (0.0,) * d
        return x1, x2

    def export(self, op: OperatorMatrix, name: str) -> Path | None:
        """Export a matrix when the config asks for it."""
        if not self.config.export_matrices:
            return None
        path = op.export(self.output_dir / f"{self.file_prefix}-{name}.psidomat")
        self.exported.append(path)
        self.run_logger.log_stage("export", matrix=name, path=str(path))
        return path


class Verdicts:
    """Collects verdicts for the assertions declared in a config."""

    def __init__(self, assertions: dict[str, float | bool], run_logger: RunLogger | None = None):
        self.assertions = assertions
        self.run_logger = run_logger
        self.items: list[AssertionVerdict] = []

    def _add(self, verdict: AssertionVerdict) -> None:
        self.items.append(verdict)
        if self.run_logger is not None:
            self.run_logger.log_verdict(verdict)

    def at_most(self, name: str, observed: float, detail: str = "") -> None:
        """Pass when observed <= threshold."""
        if name not in self.assertions:
            return
        threshold = float(self.assertions[name])
        self._add(
            AssertionVerdict(
                name=name,
                passed=observed <= threshold,
                observed=observed,
                threshold=threshold,
                detail=detail,
            )
        )

    def at_least(self, name: str, observed: float, detail: str = "") -> None:
        """Pass when observed >= threshold."""
        if name not in self.assertions:
            return
        threshold = float(self.assertions[name])
        self._add(
            AssertionVerdict(
                name=name,
                passed=observed >= threshold,
                observed=observed,
                threshold=threshold,
                detail=detail,
            )
        )

    def holds(self, name: str, condition: bool, observed: float | None = None, detail: str = "") -> None:
        """Pass when the condition matches the declared boolean."""
        if name not in self.assertions:
            return
        expected = bool(self.assertions[name])
        self._add(
            AssertionVerdict(
                name=name,
                passed=condition == expected,
                observed=observed,
                threshold=expected,
                detail=detail,
            )
        )


class Experiment(ABC):
    """
    Abstract base class for experiment kinds.

    Subclasses declare their tables and assertions and implement `run`.
    """

    # Whether the experiment assembles dense n^d × n^d matrices
    uses_matrices: bool = True

    @property
    @abstractmethod
    def name(self) -> str:
        """Return the experiment kind."""
        pass

    @property
    @abstractmethod
    def description(self) -> str:
        """Return a one-line description."""
        pass

    @property
    @abstractmethod
    def table_columns(self) -> dict[str, list[str]]:
        """
        Return the column order of every emitted table.

        The table named `main` is written as `<kind>-<hash>.csv`; other tables get
        their name appended to the file stem.
        """
        pass

    @property
    @abstractmethod
    def supported_assertions(self) -> dict[str, str]:
        """Return assertion names mapped to what they check."""
        pass

    def columns_for(self, config: ExperimentConfig) -> dict[str, list[str]]:
        """Column order for a given config (dimension-dependent tables override this)."""
        return self.table_columns

    def validate(self, config: ExperimentConfig) -> list[str]:
        """
        Kind-specific semantic checks.

        Returns:
            List of validation errors (empty if valid)
        """
        return []

    @abstractmethod
    def run(self, context: ExperimentContext) -> ExperimentResult:
        """
        Run the experiment.

        Args:
            context: Run context with the built symbol and grid

        Returns:
            ExperimentResult with tables, verdicts and summary
        """
        pass

    def verdicts(self, context: ExperimentContext) -> Verdicts:
        return Verdicts(context.config.assertions, context.run_logger)

    def __repr__(self) -> str:
        return f"Experiment(name={self.name})"


def summary_value(value: Any) -> Any:
    """Convert numpy scalars to plain Python values for the manifest."""
    if hasattr(value, "item"):
        return value.item()
    return value
