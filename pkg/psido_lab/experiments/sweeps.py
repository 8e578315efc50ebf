"""
Sweep experiments: weak compactness and the L² condition along the schedule arms.
"""

import logging
from collections.abc import Sequence

import numpy as np

from psido_lab.diagnostics import (
    BUMP_PROFILES,
    ScheduledPoint,
    arm_trends,
    evaluate_sweep,
    l2_condition_stat,
    sweep_schedule,
    validate_schedule,
    weak_boundedness_stat,
    weak_compactness_stat,
)
from psido_lab.discretization import Grid, assemble
from psido_lab.experiments.base import MAIN_TABLE, Experiment, ExperimentContext
from psido_lab.schema.schema import (
    ExperimentConfig,
    ExperimentResult,
    ScheduleSpec,
    SweepArm,
    SweepKind,
    SweepPoint,
)

logger = logging.getLogger(__name__)

BOUNDEDNESS_ARM = "boundedness"
SWEEP_COLUMNS = ["arm", "x0_norm", "R", "statistic"]


def schedule_errors(config: ExperimentConfig, with_offsets: bool = True) -> list[str]:
    """
    Check bump ids, offsets and the schedule against the grid.

    Grid-level problems (odd n, dimension, size) are reported by the config manager;
    the schedule is only checked when a grid can be built.
    """
    errors = []
    spec = config.grid
    d = spec.dimension
    bumps = config.bumps
    for label, value in (("bumps.x1", bumps.x1), ("bumps.x2", bumps.x2)):
        if value is not None and len(value) != d:
            errors.append(f"{label}: expected {d} coordinates, got {len(value)}")
    for label, profile in (("bumps.profile", bumps.profile), ("bumps.second_profile", bumps.second_profile)):
        if profile is not None and profile not in BUMP_PROFILES:
            errors.append(f"{label}: unknown bump profile '{profile}'; available: {sorted(BUMP_PROFILES)}")
    if errors or d not in (1, 2) or spec.points_per_dim % 2 or spec.points_per_dim < 2:
        return errors

    grid = Grid.from_spec(spec)
    offsets = [bumps.x1 or [0.0] * d, bumps.x2 or [0.0] * d] if with_offsets else []
    points = sweep_schedule(config.schedule, grid)
    if not points:
        errors.append("schedule: at least one arm must be configured")
    errors.extend(
        validate_schedule(
            points, grid, offsets, spec.resolved_safe_radius, config.schedule.min_points_per_radius
        )
    )
    return errors


def sweep_rows(sweep: Sequence[SweepPoint]) -> list[dict[str, object]]:
    return [
        {"arm": p.arm, "x0_norm": p.x0_norm, "R": p.R, "statistic": p.statistic} for p in sweep
    ]


def relative_spread(values: Sequence[float]) -> float:
    """max |v - v_0| / |v_0|; 0 for an all-zero sequence, inf when only v_0 vanishes."""
    if not values:
        return 0.0
    first = values[0]
    spread = max(abs(v - first) for v in values)
    if first == 0.0:
        return 0.0 if spread == 0.0 else float("inf")
    return spread / abs(first)


def trend_criterion(schedule: ScheduleSpec) -> dict[str, float]:
    return {
        "final_fraction": schedule.final_fraction,
        "max_step_growth": schedule.max_step_growth,
        "noise_floor": schedule.noise_floor,
    }


SCHEDULE_ASSERTIONS = {
    "trend": "every arm passes the decay criterion (true) or some arm fails it (false)",
    "constant_across_schedule": "relative spread of the statistic over the schedule <= threshold",
    "max_statistic": "largest statistic over the schedule <= threshold",
}


class WeakCompactnessExperiment(Experiment):
    """R^{-d}|⟨T φ₁^{x₀+x₁,R}, φ₂^{x₀+x₂,R}⟩| along translation, dilation and concentration."""

    @property
    def name(self) -> str:
        return "weak-compactness"

    @property
    def description(self) -> str:
        return "Weak compactness statistic along the sweep arms"

    @property
    def table_columns(self) -> dict[str, list[str]]:
        return {MAIN_TABLE: SWEEP_COLUMNS}

    @property
    def supported_assertions(self) -> dict[str, str]:
        return {
            **SCHEDULE_ASSERTIONS,
            "max_boundedness": "largest weak boundedness statistic <= threshold",
            "zero_beyond_radius": "largest statistic with |x0| - R beyond the x-support <= threshold",
        }

    def validate(self, config: ExperimentConfig) -> list[str]:
        errors = schedule_errors(config)
        if "zero_beyond_radius" in config.assertions and config.symbol.x_support_radius is None:
            errors.append("assertions.zero_beyond_radius: needs symbol.x_support_radius")
        return errors

    def run(self, context: ExperimentContext) -> ExperimentResult:
        grid = context.grid
        safe = context.safe_radius
        op = assemble(context.symbol, grid, context.size_cap, context.jobs)
        context.run_logger.log_stage("assemble", size=grid.size)
        context.export(op, "operator")

        phi1, phi2 = context.bumps()
        x1, x2 = context.offsets()
        schedule = sweep_schedule(context.config.schedule, grid)

        def statistic(p: ScheduledPoint) -> float:
            return weak_compactness_stat(op, phi1, phi2, x1, x2, p.x0, p.R, safe)

        sweep = evaluate_sweep(schedule, statistic, SweepKind.WEAK_COMPACTNESS, context.jobs)
        context.run_logger.log_stage("sweep", points=len(sweep))

        # Weak boundedness at x₀ = 0 over every radius the schedule visits
        radii = sorted({p.R for p in schedule if p.arm != SweepArm.TRANSLATION.value})
        boundedness = [
            SweepPoint(
                arm=BOUNDEDNESS_ARM,
                x0=(0.0,) * grid.dimension,
                R=r,
                statistic=weak_boundedness_stat(op, phi1, phi2, x1, x2, r, safe),
                kind=SweepKind.WEAK_BOUNDEDNESS,
            )
            for r in radii
        ]

        criterion = trend_criterion(context.config.schedule)
        trends = arm_trends(sweep, **criterion)
        values = [p.statistic for p in sweep]
        spread = relative_spread(values)
        max_boundedness = max((p.statistic for p in boundedness), default=0.0)
        summary: dict[str, object] = {
            "max_statistic": max(values),
            "arm_trends": trends,
            "relative_spread": spread,
            "max_boundedness": max_boundedness,
        }

        verdicts = self.verdicts(context)
        verdicts.holds("trend", all(trends.values()), detail=f"arm trends {trends}")
        verdicts.at_most("constant_across_schedule", spread)
        verdicts.at_most("max_statistic", max(values))
        verdicts.at_most("max_boundedness", max_boundedness)

        rho = context.symbol.x_support_radius
        if rho is not None:
            reach = max(float(np.linalg.norm(x1)), float(np.linalg.norm(x2)))
            beyond = [p.statistic for p in sweep if p.x0_norm - p.R > rho + reach]
            summary["points_beyond_radius"] = len(beyond)
            verdicts.at_most(
                "zero_beyond_radius",
                max(beyond, default=0.0),
                f"{len(beyond)} points with |x0| - R > {rho + reach:g}",
            )

        notes = []
        if not boundedness:
            notes.append("no dilation or concentration radii; weak boundedness rows omitted")
        return ExperimentResult(
            tables={MAIN_TABLE: sweep_rows(sweep) + sweep_rows(boundedness)},
            verdicts=verdicts.items,
            summary=summary,
            notes=notes,
        )


class L2ConditionExperiment(Experiment):
    """R^{-d/2}‖T φ^{x₀,R}‖_{L²} along the sweep arms."""

    @property
    def name(self) -> str:
        return "l2-condition"

    @property
    def description(self) -> str:
        return "L² condition statistic along the sweep arms"

    @property
    def table_columns(self) -> dict[str, list[str]]:
        return {MAIN_TABLE: SWEEP_COLUMNS}

    @property
    def supported_assertions(self) -> dict[str, str]:
        return dict(SCHEDULE_ASSERTIONS)

    def validate(self, config: ExperimentConfig) -> list[str]:
        return schedule_errors(config, with_offsets=False)

    def run(self, context: ExperimentContext) -> ExperimentResult:
        grid = context.grid
        safe = context.safe_radius
        op = assemble(context.symbol, grid, context.size_cap, context.jobs)
        context.run_logger.log_stage("assemble", size=grid.size)
        context.export(op, "operator")

        phi, _ = context.bumps()
        schedule = sweep_schedule(context.config.schedule, grid)
        sweep = evaluate_sweep(
            schedule,
            lambda p: l2_condition_stat(op, phi, p.x0, p.R, safe),
            SweepKind.L2_CONDITION,
            context.jobs,
        )
        context.run_logger.log_stage("sweep", points=len(sweep))

        trends = arm_trends(sweep, **trend_criterion(context.config.schedule))
        values = [p.statistic for p in sweep]
        spread = relative_spread(values)

        verdicts = self.verdicts(context)
        verdicts.holds("trend", all(trends.values()), detail=f"arm trends {trends}")
        verdicts.at_most("constant_across_schedule", spread)
        verdicts.at_most("max_statistic", max(values))

        return ExperimentResult(
            tables={MAIN_TABLE: sweep_rows(sweep)},
            verdicts=verdicts.items,
            summary={"max_statistic": max(values), "arm_trends": trends, "relative_spread": spread},
        )
