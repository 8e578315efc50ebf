"""
Singular-value compactness experiment.
"""

import logging

from psido_lab.diagnostics import svd_tail
from psido_lab.discretization import Grid, assemble
from psido_lab.experiments.base import MAIN_TABLE, Experiment, ExperimentContext
from psido_lab.schema.schema import ExperimentConfig, ExperimentResult, SpectrumReport, SpectrumSpec

logger = logging.getLogger(__name__)


def resolved_k_list(spec: SpectrumSpec, grid: Grid) -> list[int]:
    """Configured tail indices, defaulting to k = n^d / 4."""
    return list(spec.k_list) if spec.k_list else [max(grid.size // 4, 1)]


def spectrum_rows(report: SpectrumReport, operator: str | None = None) -> list[dict[str, object]]:
    """One row per singular value: k, s_k and s_k / s_1."""
    rows: list[dict[str, object]] = []
    for k, s in enumerate(report.singular_values, start=1):
        row: dict[str, object] = {"k": k, "singular_value": s, "tail_ratio": report.tail_ratio(k)}
        if operator is not None:
            row = {"operator": operator, **row}
        rows.append(row)
    return rows


class CompactnessExperiment(Experiment):
    """Full spectrum of T_σ with tail ratios and effective ranks."""

    @property
    def name(self) -> str:
        return "compactness"

    @property
    def description(self) -> str:
        return "Singular value tail of the discretized operator"

    @property
    def table_columns(self) -> dict[str, list[str]]:
        return {MAIN_TABLE: ["k", "singular_value", "tail_ratio"]}

    @property
    def supported_assertions(self) -> dict[str, str]:
        return {
            "max_tail_ratio": "tail_ratio(k) <= threshold for every configured k",
            "min_tail_ratio": "tail_ratio(k) >= threshold for every configured k",
            "max_effective_rank": "effective rank at the first eps <= threshold",
            "min_effective_rank": "effective rank at the first eps >= threshold",
        }

    def validate(self, config: ExperimentConfig) -> list[str]:
        size = config.grid.points_per_dim**config.grid.dimension
        return [
            f"spectrum.k_list: k={k} outside 1..{size}"
            for k in config.spectrum.k_list or []
            if not 1 <= k <= size
        ]

    def run(self, context: ExperimentContext) -> ExperimentResult:
        spec = context.config.spectrum
        op = assemble(context.symbol, context.grid, context.size_cap, context.jobs)
        context.run_logger.log_stage("assemble", size=context.grid.size)
        context.export(op, "operator")

        ks = resolved_k_list(spec, context.grid)
        report = svd_tail(op, ks)
        context.run_logger.log_stage("svd", top=report.singular_values[0])

        tails = report.tail_ratios()
        ranks = {eps: report.effective_rank(eps) for eps in spec.effective_rank_eps}
        summary = {
            "largest_singular_value": report.singular_values[0],
            "tail_ratios": {str(k): v for k, v in tails.items()},
            "effective_ranks": {f"{eps:g}": r for eps, r in ranks.items()},
        }

        notes = []
        if min(tails.values()) >= spec.control_threshold:
            notes.append(
                f"non-compact control: tail ratios {tails} stay above {spec.control_threshold:g}"
            )

        verdicts = self.verdicts(context)
        verdicts.at_most("max_tail_ratio", max(tails.values()), f"tail ratios {tails}")
        verdicts.at_least("min_tail_ratio", min(tails.values()), f"tail ratios {tails}")
        first_rank = ranks[spec.effective_rank_eps[0]] if ranks else 0
        verdicts.at_most("max_effective_rank", float(first_rank))
        verdicts.at_least("min_effective_rank", float(first_rank))

        return ExperimentResult(
            tables={MAIN_TABLE: spectrum_rows(report)},
            verdicts=verdicts.items,
            summary=summary,
            notes=notes,
        )
