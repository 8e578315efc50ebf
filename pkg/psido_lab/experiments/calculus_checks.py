"""
Transpose expansion and commutator experiments.
"""

import logging

import numpy as np

from psido_lab.calculus import commutator_transpose_symbol, order_reduce, transpose_expansion
from psido_lab.diagnostics import (
    ab_sweep,
    evaluate_sweep,
    safe_block_norm,
    svd_tail,
    sweep_schedule,
    transpose_residuals,
    weak_compactness_stat,
)
from psido_lab.discretization import (
    OperatorMatrix,
    assemble,
    commutator_matrix_direct,
    commutator_of,
)
from psido_lab.experiments.base import MAIN_TABLE, Experiment, ExperimentContext, Verdicts
from psido_lab.experiments.spectral import resolved_k_list, spectrum_rows
from psido_lab.experiments.sweeps import schedule_errors
from psido_lab.factory import build_function, build_symbol
from psido_lab.schema.schema import ExperimentConfig, ExperimentResult, SweepKind
from psido_lab.symbols.functions import SmoothFunction

logger = logging.getLogger(__name__)

# first / last residual is reported as this when the last residual vanishes
MAX_IMPROVEMENT = 1e300


def is_non_increasing(values: list[float], tolerance: float) -> bool:
    return all(b <= a + tolerance for a, b in zip(values, values[1:]))


class TransposeCheckExperiment(Experiment):
    """Residual ‖M(T_σ)ᵀ - M(T_{σ*_N})‖ on the torus-safe block for each N."""

    @property
    def name(self) -> str:
        return "transpose-check"

    @property
    def description(self) -> str:
        return "Transpose expansion residuals on the torus-safe block"

    @property
    def table_columns(self) -> dict[str, list[str]]:
        return {MAIN_TABLE: ["N", "residual", "residual_ratio"]}

    @property
    def supported_assertions(self) -> dict[str, str]:
        return {
            "max_residual": "largest residual over the configured N <= threshold",
            "final_residual": "residual at the largest N <= threshold",
            "non_increasing": "residuals do not increase with N (true/false)",
            "final_fraction": "last residual / first residual <= threshold",
            "min_improvement": "first residual / last residual >= threshold",
        }

    def validate(self, config: ExperimentConfig) -> list[str]:
        orders = config.expansion.resolved_orders()
        errors = [f"expansion.orders: N={N} must be >= 1" for N in orders if N < 1]
        if orders != sorted(set(orders)):
            errors.append(f"expansion.orders: must be strictly increasing, got {orders}")
        return errors

    def run(self, context: ExperimentContext) -> ExperimentResult:
        grid = context.grid
        sym = context.symbol
        orders = context.config.expansion.resolved_orders()

        forward = assemble(sym, grid, context.size_cap, context.jobs)
        context.run_logger.log_stage("assemble", size=grid.size)
        context.export(forward, "operator")
        for N in orders:
            # fail fast on order caps before the expensive assemblies
            transpose_expansion(sym, N)

        residuals = transpose_residuals(
            sym, orders, grid, context.safe_radius, context.size_cap, context.jobs, forward
        )
        context.run_logger.log_stage("residuals", orders=orders, residuals=residuals)

        first, last = residuals[0], residuals[-1]
        ratios = [r / first if first > 0 else 0.0 for r in residuals]
        rows = [
            {"N": N, "residual": r, "residual_ratio": q}
            for N, r, q in zip(orders, residuals, ratios)
        ]
        scale = safe_block_norm(forward.entries, grid.safe_mask(context.safe_radius))
        non_increasing = is_non_increasing(residuals, 1e-12 * max(scale, 1.0))
        improvement = first / last if last > 0 else MAX_IMPROVEMENT

        verdicts = self.verdicts(context)
        verdicts.at_most("max_residual", max(residuals))
        verdicts.at_most("final_residual", last, f"N={orders[-1]}")
        verdicts.holds("non_increasing", non_increasing, detail=f"residuals {residuals}")
        verdicts.at_most("final_fraction", ratios[-1])
        verdicts.at_least("min_improvement", improvement)

        return ExperimentResult(
            tables={MAIN_TABLE: rows},
            verdicts=verdicts.items,
            summary={
                "residuals": dict(zip(map(str, orders), residuals)),
                "safe_block_norm": scale,
                "non_increasing": non_increasing,
            },
        )


class CommutatorExperiment(Experiment):
    """
    [T_σ, M_a] for a bounded multiplier a.

    Besides the spectrum of the commutator this reports the two-path assembly check,
    an optional control spectrum, the commutator transpose identity, the A/B split of
    the weak compactness sweep and the order-reduction decomposition.
    """

    @property
    def name(self) -> str:
        return "commutator"

    @property
    def description(self) -> str:
        return "Commutator with a multiplication operator"

    @property
    def table_columns(self) -> dict[str, list[str]]:
        return {
            MAIN_TABLE: ["operator", "k", "singular_value", "tail_ratio"],
            "transpose": ["N", "residual"],
            "sweep": ["arm", "x0_norm", "R", "statistic", "a_term", "b_term"],
            "reduction": ["component", "max_change", "flagged"],
        }

    def columns_for(self, config: ExperimentConfig) -> dict[str, list[str]]:
        columns = dict(self.table_columns)
        if not config.commutator.sweep:
            columns.pop("sweep")
        if config.commutator.order_reduction is None:
            columns.pop("reduction")
        if not config.commutator.transpose_orders:
            columns.pop("transpose")
        return columns

    @property
    def supported_assertions(self) -> dict[str, str]:
        return {
            "two_path_agreement": "max |direct - assembled| / max |assembled| <= threshold",
            "max_tail_ratio": "commutator tail_ratio(k) <= threshold for every configured k",
            "control_ratio": "commutator tail / control tail at the first k <= threshold",
            "constant_multiplier_zero": "‖[T, M_1]‖ / ‖T‖ <= threshold",
            "ab_bound": "sweep statistic <= A + B at every point (true/false)",
            "reconstruction_error": "max |Σ ξ_j σ_j - σ₀| on samples <= threshold",
            "max_transpose_residual": "largest commutator transpose residual <= threshold",
            "transpose_non_increasing": "commutator transpose residuals do not increase with N",
        }

    def validate(self, config: ExperimentConfig) -> list[str]:
        spec = config.commutator
        errors = []
        if "control_ratio" in config.assertions and spec.control is None:
            errors.append("assertions.control_ratio: needs commutator.control")
        if "ab_bound" in config.assertions and not spec.sweep:
            errors.append("assertions.ab_bound: needs commutator.sweep: true")
        if "reconstruction_error" in config.assertions and spec.order_reduction is None:
            errors.append("assertions.reconstruction_error: needs commutator.order_reduction")
        if any(N < 1 for N in spec.transpose_orders):
            errors.append(f"commutator.transpose_orders: orders must be >= 1, got {spec.transpose_orders}")
        size = config.grid.points_per_dim**config.grid.dimension
        errors.extend(
            f"spectrum.k_list: k={k} outside 1..{size}"
            for k in config.spectrum.k_list or []
            if not 1 <= k <= size
        )
        if spec.sweep:
            errors.extend(schedule_errors(config))
        return errors

    def run(self, context: ExperimentContext) -> ExperimentResult:
        config = context.config
        spec = config.commutator
        grid = context.grid
        sym = context.symbol
        d = grid.dimension
        a = build_function(spec.multiplier, d)

        op = assemble(sym, grid, context.size_cap, context.jobs)
        comm = commutator_of(op, a)
        direct = commutator_matrix_direct(sym, a, grid, context.size_cap, context.jobs)
        context.run_logger.log_stage("assemble", size=grid.size, multiplier=a.name)
        context.export(op, "operator")
        context.export(comm, "commutator")

        scale = float(np.max(np.abs(comm.entries)))
        gap = float(np.max(np.abs(direct.entries - comm.entries)))
        two_path = gap / scale if scale > 0 else gap

        ks = resolved_k_list(config.spectrum, grid)
        report = svd_tail(comm, ks)
        rows = spectrum_rows(report, "commutator")
        tails = report.tail_ratios()
        summary: dict[str, object] = {
            "two_path_difference": two_path,
            "commutator_norm": report.singular_values[0],
            "tail_ratios": {str(k): v for k, v in tails.items()},
        }

        verdicts = self.verdicts(context)
        verdicts.at_most("two_path_agreement", two_path)
        verdicts.at_most("max_tail_ratio", max(tails.values()), f"tail ratios {tails}")

        if spec.control is not None:
            control = build_symbol(spec.control, d)
            control_comm = commutator_of(assemble(control, grid, context.size_cap, context.jobs), a)
            control_report = svd_tail(control_comm, ks)
            rows.extend(spectrum_rows(control_report, "control"))
            control_tail = control_report.tail_ratio(ks[0])
            ratio = tails[ks[0]] / control_tail if control_tail > 0 else float("inf")
            summary["control_tail_ratios"] = {
                str(k): v for k, v in control_report.tail_ratios().items()
            }
            summary["control_ratio"] = ratio
            verdicts.at_most("control_ratio", ratio, f"k={ks[0]}")

        op_norm = op.norm()
        constant = commutator_of(op, 1.0)
        constant_ratio = constant.norm() / op_norm if op_norm > 0 else constant.norm()
        summary["constant_multiplier_ratio"] = constant_ratio
        verdicts.at_most("constant_multiplier_zero", constant_ratio)

        tables: dict[str, list[dict[str, object]]] = {MAIN_TABLE: rows}
        if spec.transpose_orders:
            tables["transpose"] = self._transpose_rows(context, comm, a, verdicts)
        if spec.sweep:
            tables["sweep"] = self._sweep_rows(context, comm, op, a, verdicts)
        if spec.order_reduction is not None:
            tables["reduction"] = self._reduction_rows(context, summary, verdicts)

        return ExperimentResult(tables=tables, verdicts=verdicts.items, summary=summary)

    def _transpose_rows(
        self,
        context: ExperimentContext,
        comm: OperatorMatrix,
        a: SmoothFunction,
        verdicts: Verdicts,
    ) -> list[dict[str, object]]:
        """‖[T_σ, M_a]ᵀ + [T_{σ*_N}, M_a]‖ on the torus-safe block."""
        grid = context.grid
        mask = grid.safe_mask(context.safe_radius)
        orders = context.config.commutator.transpose_orders
        residuals = []
        for N in orders:
            reflected = assemble(
                commutator_transpose_symbol(context.symbol, N), grid, context.size_cap, context.jobs
            )
            residual = safe_block_norm(comm.entries.T + commutator_of(reflected, a).entries, mask)
            residuals.append(residual)
        context.run_logger.log_stage("commutator_transpose", orders=orders, residuals=residuals)

        scale = safe_block_norm(comm.entries, mask)
        verdicts.at_most("max_transpose_residual", max(residuals))
        verdicts.holds(
            "transpose_non_increasing",
            is_non_increasing(residuals, 1e-12 * max(scale, 1.0)),
            detail=f"residuals {residuals}",
        )
        return [{"N": N, "residual": r} for N, r in zip(orders, residuals)]

    def _sweep_rows(
        self,
        context: ExperimentContext,
        comm: OperatorMatrix,
        op: OperatorMatrix,
        a: SmoothFunction,
        verdicts: Verdicts,
    ) -> list[dict[str, object]]:
        """Weak compactness statistic of the commutator with its A and B terms."""
        grid = context.grid
        safe = context.safe_radius
        phi1, phi2 = context.bumps()
        x1, x2 = context.offsets()
        schedule = sweep_schedule(context.config.schedule, grid)

        sweep = evaluate_sweep(
            schedule,
            lambda p: weak_compactness_stat(comm, phi1, phi2, x1, x2, p.x0, p.R, safe),
            SweepKind.WEAK_COMPACTNESS,
            context.jobs,
        )

        a_points, b_points = ab_sweep(op, a, phi1, phi2, x1, x2, schedule, safe, context.jobs)
        context.run_logger.log_stage("ab_sweep", points=len(sweep))

        bound_holds = all(
            p.statistic <= (A.statistic + B.statistic) * (1.0 + 1e-10) + 1e-14
            for p, A, B in zip(sweep, a_points, b_points)
        )
        verdicts.holds("ab_bound", bound_holds)
        return [
            {
                "arm": p.arm,
                "x0_norm": p.x0_norm,
                "R": p.R,
                "statistic": p.statistic,
                "a_term": A.statistic,
                "b_term": B.statistic,
            }
            for p, A, B in zip(sweep, a_points, b_points)
        ]

    def _reduction_rows(
        self, context: ExperimentContext, summary: dict[str, object], verdicts: Verdicts
    ) -> list[dict[str, object]]:
        """Order reduction of σ checked on seeded samples of the configured boxes."""
        spec = context.config.commutator.order_reduction
        assert spec is not None
        d = context.grid.dimension
        window = build_function(spec.window, d)
        reduction = order_reduce(context.symbol, window, spec.quadrature_nodes, spec.strict)

        rng = np.random.default_rng(context.seed)
        x = rng.uniform(-spec.x_radius, spec.x_radius, size=(spec.samples, d))
        xi = rng.uniform(-spec.xi_radius, spec.xi_radius, size=(spec.samples, d))
        if d == 1:
            x, xi = x[:, 0], xi[:, 0]
        error = reduction.reconstruction_error(x, xi)
        context.run_logger.log_stage(
            "order_reduction", error=error, flags=reduction.convergence_flags
        )

        summary["reconstruction_error"] = error
        summary["quadrature_converged"] = reduction.converged
        verdicts.at_most("reconstruction_error", error, f"{spec.samples} samples")
        return [
            {"component": j + 1, "max_change": change, "flagged": flagged}
            for j, (change, flagged) in enumerate(
                zip(reduction.max_changes, reduction.convergence_flags)
            )
        ]
