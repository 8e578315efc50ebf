"""
Symbol-level experiments that need no dense matrices: class decay and T(1) traces.
"""

import logging

import numpy as np
from scipy.stats import qmc

from psido_lab.diagnostics import t1_decay_profile, t1_trace, trend_passes
from psido_lab.experiments.base import MAIN_TABLE, Experiment, ExperimentContext, Verdicts
from psido_lab.experiments.sweeps import trend_criterion
from psido_lab.schema.schema import DerivativeSpec, ExperimentConfig, ExperimentResult
from psido_lab.symbols.estimates import (
    class_shell_estimate,
    cordes_values,
    fd_check,
    min_peetre_margin,
    shell_samples,
)

logger = logging.getLogger(__name__)

CMO_NOTE = (
    "cmo_proxy rows report sampled sup |σ(x,0)| over |x|-shells; decay is a proxy for, "
    "not a proof of, membership in CMO"
)
FD_BOX = 4.0


def _index_label(entries: list[int] | tuple[int, ...]) -> str:
    return "(" + ",".join(str(e) for e in entries) + ")"


def _derivatives(config: ExperimentConfig) -> list[DerivativeSpec]:
    d = config.grid.dimension
    return config.class_check.derivatives or [DerivativeSpec(alpha=[0] * d, beta=[0] * d)]


class ClassCheckExperiment(Experiment):
    """Sampled decay of the weighted derivatives, finite-difference and Cordes checks."""

    uses_matrices = False

    @property
    def name(self) -> str:
        return "class-check"

    @property
    def description(self) -> str:
        return "Shell estimates of the vanishing symbol-class bounds"

    @property
    def table_columns(self) -> dict[str, list[str]]:
        return {
            MAIN_TABLE: ["quantity", "alpha", "beta", "shell_lo", "shell_hi", "value", "samples"]
        }

    @property
    def supported_assertions(self) -> dict[str, str]:
        return {
            "shell_decay": "every derivative passes the trend criterion over the shells (true/false)",
            "max_fd_residual": "largest analytic vs finite-difference gap <= threshold",
            "min_peetre_margin": "smallest relative Peetre margin >= threshold",
            "cmo_decay": "sup |σ(x,0)| passes the trend criterion over |x|-shells (true/false)",
            "cordes_decay": "Cordes shell sups pass the trend criterion (true/false)",
        }

    def validate(self, config: ExperimentConfig) -> list[str]:
        spec = config.class_check
        d = config.grid.dimension
        errors = []
        for i, pair in enumerate(_derivatives(config)):
            if len(pair.alpha) != d or len(pair.beta) != d:
                errors.append(f"class_check.derivatives[{i}]: alpha and beta need {d} entries")
            if any(e < 0 for e in pair.alpha + pair.beta):
                errors.append(f"class_check.derivatives[{i}]: entries must be non-negative")
        shells = spec.shells
        if not shells or shells[0] <= 0 or any(b <= a for a, b in zip(shells, shells[1:])):
            errors.append(f"class_check.shells: must be positive and increasing, got {shells}")
        if "cordes_decay" in config.assertions and spec.cordes_order is None:
            errors.append("assertions.cordes_decay: needs class_check.cordes_order")
        if "min_peetre_margin" in config.assertions and spec.peetre_samples == 0:
            errors.append("assertions.min_peetre_margin: needs class_check.peetre_samples > 0")
        return errors

    def run(self, context: ExperimentContext) -> ExperimentResult:
        config = context.config
        spec = config.class_check
        sym = context.symbol
        d = sym.dimension
        criterion = trend_criterion(config.schedule)
        rows: list[dict[str, object]] = []
        summary: dict[str, object] = {}
        verdicts = self.verdicts(context)

        decays: dict[str, bool] = {}
        for pair in _derivatives(config):
            estimate = class_shell_estimate(
                sym,
                pair.alpha,
                pair.beta,
                spec.order,
                spec.shells,
                spec.samples_per_shell,
                context.seed,
                context.jobs,
            )
            label = f"{_index_label(pair.alpha)}{_index_label(pair.beta)}"
            decays[label] = trend_passes(estimate.shell_sups, **criterion)
            for (lo, hi), sup, count in zip(
                estimate.shell_bounds(), estimate.shell_sups, estimate.sample_counts
            ):
                rows.append(
                    {
                        "quantity": "derivative_sup",
                        "alpha": _index_label(pair.alpha),
                        "beta": _index_label(pair.beta),
                        "shell_lo": lo,
                        "shell_hi": hi,
                        "value": sup,
                        "samples": count,
                    }
                )
        context.run_logger.log_stage("shell_estimates", decays=decays)
        summary["shell_decay"] = decays
        verdicts.holds("shell_decay", all(decays.values()), detail=f"per derivative {decays}")

        # Analytic derivatives against the nested central stencil on a Halton box
        u = qmc.Halton(d=2 * d, scramble=True, seed=context.seed).random(spec.fd_points)
        box = FD_BOX * (2.0 * u - 1.0)
        x, xi = box[:, :d], box[:, d:]
        if d == 1:
            x, xi = x[:, 0], xi[:, 0]
        fd_residuals = []
        for pair in _derivatives(config):
            residual = fd_check(sym, x, xi, pair.alpha, pair.beta, spec.fd_step)
            fd_residuals.append(residual)
            rows.append(
                {
                    "quantity": "fd_residual",
                    "alpha": _index_label(pair.alpha),
                    "beta": _index_label(pair.beta),
                    "shell_lo": None,
                    "shell_hi": None,
                    "value": residual,
                    "samples": spec.fd_points,
                }
            )
        summary["max_fd_residual"] = max(fd_residuals)
        verdicts.at_most("max_fd_residual", max(fd_residuals), f"step {spec.fd_step:g}")

        if spec.cordes_order is not None:
            rows.extend(self._cordes_rows(context, spec.cordes_order, summary, verdicts, criterion))

        profile = t1_decay_profile(
            sym, config.cmo_proxy.radii, config.cmo_proxy.samples_per_shell, context.seed
        )
        zero = _index_label([0] * d)
        rows.extend(
            {
                "quantity": "cmo_proxy",
                "alpha": zero,
                "beta": zero,
                "shell_lo": lo,
                "shell_hi": hi,
                "value": sup,
                "samples": config.cmo_proxy.samples_per_shell,
            }
            for lo, hi, sup in profile
        )
        cmo_decay = trend_passes([sup for _, _, sup in profile], **criterion)
        summary["cmo_decay"] = cmo_decay
        verdicts.holds("cmo_decay", cmo_decay)

        if spec.peetre_samples > 0:
            margin = min_peetre_margin(spec.peetre_samples, context.seed, d)
            rows.append(
                {
                    "quantity": "peetre_min_margin",
                    "alpha": None,
                    "beta": None,
                    "shell_lo": None,
                    "shell_hi": None,
                    "value": margin,
                    "samples": spec.peetre_samples,
                }
            )
            summary["min_peetre_margin"] = margin
            verdicts.at_least("min_peetre_margin", margin)

        return ExperimentResult(
            tables={MAIN_TABLE: rows},
            verdicts=verdicts.items,
            summary=summary,
            notes=[CMO_NOTE, "shell suprema are sampled; they cannot certify class membership"],
        )

    def _cordes_rows(
        self,
        context: ExperimentContext,
        N: int,
        summary: dict[str, object],
        verdicts: Verdicts,
        criterion: dict[str, float],
    ) -> list[dict[str, object]]:
        """Shell sups of |(Id - Δ_x)^N (Id - Δ_ξ)^N σ|."""
        spec = context.config.class_check
        sym = context.symbol
        bounds = [
            (lo, spec.shells[i + 1] if i + 1 < len(spec.shells) else 2.0 * lo)
            for i, lo in enumerate(spec.shells)
        ]
        sups = []
        for i, (lo, hi) in enumerate(bounds):
            x, xi = shell_samples(lo, hi, spec.samples_per_shell, sym.dimension, context.seed + i)
            sups.append(float(np.max(np.abs(cordes_values(sym, N, x, xi)))))
        decay = trend_passes(sups, **criterion)
        summary["cordes_sups"] = sups
        summary["cordes_decay"] = decay
        verdicts.holds("cordes_decay", decay)
        label = f"N={N}"
        return [
            {
                "quantity": "cordes_sup",
                "alpha": label,
                "beta": label,
                "shell_lo": lo,
                "shell_hi": hi,
                "value": sup,
                "samples": spec.samples_per_shell,
            }
            for (lo, hi), sup in zip(bounds, sups)
        ]


class T1TraceExperiment(Experiment):
    """T_σ(1) through `apply` against σ(x_m, 0), with the CMO decay proxy."""

    uses_matrices = False

    @property
    def name(self) -> str:
        return "t1-trace"

    @property
    def description(self) -> str:
        return "T(1) on the grid against σ(x, 0)"

    @property
    def table_columns(self) -> dict[str, list[str]]:
        return self._columns(1)

    def columns_for(self, config: ExperimentConfig) -> dict[str, list[str]]:
        return self._columns(config.grid.dimension)

    @staticmethod
    def _columns(dimension: int) -> dict[str, list[str]]:
        coords = [f"x{a + 1}" for a in range(dimension)]
        return {
            MAIN_TABLE: coords + ["apply_re", "apply_im", "direct_re", "direct_im", "abs_diff"],
            "cmo_proxy": ["shell_lo", "shell_hi", "sup"],
        }

    @property
    def supported_assertions(self) -> dict[str, str]:
        return {
            "max_abs_diff": "max |T(1) - σ(·,0)| over the grid <= threshold",
            "max_abs_value": "max |σ(x_m, 0)| over the grid <= threshold",
            "cmo_decay": "sup |σ(x,0)| passes the trend criterion over |x|-shells (true/false)",
        }

    def run(self, context: ExperimentContext) -> ExperimentResult:
        grid = context.grid
        config = context.config
        trace = t1_trace(context.symbol, grid, context.jobs)
        context.run_logger.log_stage("t1_trace", max_abs_difference=trace.max_abs_difference)

        rows = []
        for point, applied, direct in zip(grid.points, trace.applied.values, trace.direct.values):
            row: dict[str, object] = {f"x{a + 1}": float(c) for a, c in enumerate(point)}
            row.update(
                {
                    "apply_re": applied.real,
                    "apply_im": applied.imag,
                    "direct_re": direct.real,
                    "direct_im": direct.imag,
                    "abs_diff": abs(applied - direct),
                }
            )
            rows.append(row)

        profile = t1_decay_profile(
            context.symbol, config.cmo_proxy.radii, config.cmo_proxy.samples_per_shell, context.seed
        )
        cmo_rows = [{"shell_lo": lo, "shell_hi": hi, "sup": sup} for lo, hi, sup in profile]
        cmo_decay = trend_passes([sup for _, _, sup in profile], **trend_criterion(config.schedule))

        max_value = trace.direct.max_abs()
        verdicts = self.verdicts(context)
        verdicts.at_most("max_abs_diff", trace.max_abs_difference)
        verdicts.at_most("max_abs_value", max_value)
        verdicts.holds("cmo_decay", cmo_decay)

        return ExperimentResult(
            tables={MAIN_TABLE: rows, "cmo_proxy": cmo_rows},
            verdicts=verdicts.items,
            summary={
                "max_abs_difference": trace.max_abs_difference,
                "max_abs_value": max_value,
                "cmo_decay": cmo_decay,
            },
            notes=[CMO_NOTE],
        )
