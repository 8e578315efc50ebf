"""
Core data models for psido-lab.

This module defines the Pydantic models shared across the library: multi-indices,
estimate and sweep records, spectra, run manifests and the experiment config tree.
"""

import math
from datetime import datetime
from enum import Enum
from itertools import product
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator


class MultiIndex(BaseModel):
    """
    A multi-index α = (α_1, ..., α_d) of non-negative integers.

    Instances are immutable and hashable, so they can key derivative caches.
    """

    model_config = ConfigDict(frozen=True)

    entries: tuple[int, ...] = Field(description="Non-negative entries, one per dimension")

    @field_validator("entries")
    @classmethod
    def _check_entries(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if len(value) == 0:
            raise ValueError("a multi-index needs at least one entry")
        if any(e < 0 for e in value):
            raise ValueError(f"entries must be non-negative, got {value}")
        return value

    @classmethod
    def of(cls, *entries: int) -> "MultiIndex":
        """Build a multi-index from positional entries."""
        return cls(entries=tuple(int(e) for e in entries))

    @classmethod
    def zero(cls, dimension: int) -> "MultiIndex":
        return cls(entries=(0,) * dimension)

    @classmethod
    def unit(cls, dimension: int, axis: int) -> "MultiIndex":
        """Return e_axis."""
        entries = [0] * dimension
        entries[axis] = 1
        return cls(entries=tuple(entries))

    @classmethod
    def enumerate(cls, dimension: int, max_order: int) -> list["MultiIndex"]:
        """
        All multi-indices with |α| <= max_order in graded lexicographic order.

        Indices are sorted by |α| first, then by entries in descending lexicographic
        order, e.g. (0,0), (1,0), (0,1), (2,0), (1,1), (0,2) for d = 2.

        Args:
            dimension: Number of entries
            max_order: Largest total order to include (negative gives an empty list)

        Returns:
            List of multi-indices
        """
        if max_order < 0:
            return []
        indices = [
            entries
            for entries in product(range(max_order + 1), repeat=dimension)
            if sum(entries) <= max_order
        ]
        indices.sort(key=lambda e: (sum(e), tuple(-v for v in e)))
        return [cls(entries=e) for e in indices]

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> int:
        """|α|."""
        return sum(self.entries)

    @property
    def factorial(self) -> int:
        """α! = α_1! ... α_d!."""
        return math.prod(math.factorial(e) for e in self.entries)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(entries=tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(entries=tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __str__(self) -> str:
        return "(" + ",".join(str(e) for e in self.entries) + ")"


class DerivativeMode(str, Enum):
    """How a symbol provides its derivatives."""

    ANALYTIC = "analytic"
    FINITE_DIFFERENCE = "finite-difference"


class ClassEstimate(BaseModel):
    """Empirical shell suprema of |∂_x^α ∂_ξ^β σ| (1+|ξ|)^{|β|-s}."""

    alpha: MultiIndex = Field(description="x-derivative multi-index")
    beta: MultiIndex = Field(description="ξ-derivative multi-index")
    order: float = Field(description="Order s used in the weight")
    shell_radii: list[float] = Field(description="Increasing lower shell radii ρ_i")
    shell_sups: list[float] = Field(description="Sampled supremum on each shell")
    sample_counts: list[int] = Field(description="Number of samples drawn on each shell")
    seed: int = Field(default=0, description="Seed of the quasi-random sampler")

    @field_validator("shell_sups")
    @classmethod
    def _non_negative(cls, value: list[float]) -> list[float]:
        if any(v < 0 for v in value):
            raise ValueError("shell suprema must be non-negative")
        return value

    def shell_bounds(self) -> list[tuple[float, float]]:
        """Return [ρ_i, ρ_{i+1}) for each shell; the last shell is [ρ_K, 2ρ_K)."""
        radii = self.shell_radii
        return [
            (radii[i], radii[i + 1] if i + 1 < len(radii) else 2.0 * radii[i])
            for i in range(len(radii))
        ]


class SweepKind(str, Enum):
    """Statistic reported by a sweep point."""

    WEAK_COMPACTNESS = "weak-compactness"
    WEAK_BOUNDEDNESS = "weak-boundedness"
    L2_CONDITION = "L2-condition"
    A_TERM = "A-term"
    B_TERM = "B-term"


class SweepArm(str, Enum):
    """One-parameter arms probing |x0| + R + 1/R -> infinity."""

    TRANSLATION = "translation"
    DILATION = "dilation"
    CONCENTRATION = "concentration"


class SweepPoint(BaseModel):
    """One evaluated point of a sweep."""

    arm: str = Field(description="Arm name the point belongs to")
    x0: tuple[float, ...] = Field(description="Translation center")
    R: float = Field(gt=0, description="Dilation scale")
    statistic: float = Field(ge=0, description="Value of the statistic")
    kind: SweepKind = Field(description="Which statistic was evaluated")

    @field_validator("statistic")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("sweep statistic must be finite")
        return value

    @property
    def x0_norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.x0))


class SpectrumReport(BaseModel):
    """Singular values of a discretized operator with tail diagnostics."""

    singular_values: list[float] = Field(description="Non-increasing singular values")
    requested_k: list[int] = Field(default_factory=list, description="Indices k of reported tails")

    @field_validator("singular_values")
    @classmethod
    def _sorted(cls, value: list[float]) -> list[float]:
        if any(v < 0 for v in value):
            raise ValueError("singular values must be non-negative")
        if any(value[i + 1] > value[i] for i in range(len(value) - 1)):
            raise ValueError("singular values must be sorted non-increasing")
        return value

    def tail_ratio(self, k: int) -> float:
        """
        Return s_k / s_1 with 1-based k.

        A zero operator has tail ratio 0.
        """
        if k < 1 or k > len(self.singular_values):
            raise ValueError(f"k={k} outside 1..{len(self.singular_values)}")
        top = self.singular_values[0]
        if top == 0.0:
            return 0.0
        return self.singular_values[k - 1] / top

    def effective_rank(self, eps: float) -> int:
        """Count of singular values strictly above eps * s_1."""
        if not self.singular_values:
            return 0
        cutoff = eps * self.singular_values[0]
        return sum(1 for s in self.singular_values if s > cutoff)

    def tail_ratios(self) -> dict[int, float]:
        return {k: self.tail_ratio(k) for k in self.requested_k}


class AssertionVerdict(BaseModel):
    """Outcome of one assertion declared in an experiment config."""

    name: str = Field(description="Assertion name as declared in the config")
    passed: bool = Field(description="Whether the assertion holds")
    observed: float | None = Field(default=None, description="Observed value that was tested")
    threshold: float | bool | None = Field(default=None, description="Threshold from the config")
    detail: str = Field(default="", description="Human-readable explanation")


class RunStatus(str, Enum):
    """Final status of an experiment run."""

    PASS = "pass"
    FAIL = "fail"
    ERROR = "error"


class RunManifest(BaseModel):
    """Structured record of one experiment run, written next to its CSV output."""

    kind: str = Field(description="Experiment kind")
    artifact_version: str = Field(description="psido-lab version that produced the run")
    config_hash: str = Field(description="SHA-256 of the canonical config projection")
    seed: int | None = Field(default=None, description="Seed used for all sampling")
    config: dict[str, Any] = Field(default_factory=dict, description="Echo of the config")
    started_at: str = Field(default_factory=lambda: datetime.now().isoformat())
    finished_at: str | None = Field(default=None)
    duration_seconds: float = Field(default=0.0)
    output_files: list[str] = Field(default_factory=list, description="Every emitted file")
    row_counts: dict[str, int] = Field(default_factory=dict, description="Rows per table")
    verdicts: list[AssertionVerdict] = Field(default_factory=list)
    summary: dict[str, Any] = Field(default_factory=dict, description="Scalar results")
    notes: list[str] = Field(default_factory=list)
    status: RunStatus = Field(default=RunStatus.PASS)
    error: str | None = Field(default=None, description="Captured error message")

    @property
    def exit_code(self) -> int:
        """0 pass, 1 assertion failure, 3 runtime error."""
        return {RunStatus.PASS: 0, RunStatus.FAIL: 1, RunStatus.ERROR: 3}[self.status]


class ExperimentResult(BaseModel):
    """Tables, verdicts and scalar summary produced by an experiment."""

    tables: dict[str, list[dict[str, Any]]] = Field(default_factory=dict)
    verdicts: list[AssertionVerdict] = Field(default_factory=list)
    summary: dict[str, Any] = Field(default_factory=dict)
    notes: list[str] = Field(default_factory=list)


# ---------------------------------------------------------------------------
# Experiment configuration
# ---------------------------------------------------------------------------


class ExperimentKind(str, Enum):
    """Experiment kinds accepted by the CLI."""

    TRANSPOSE_CHECK = "transpose-check"
    COMPACTNESS = "compactness"
    WEAK_COMPACTNESS = "weak-compactness"
    L2_CONDITION = "l2-condition"
    COMMUTATOR = "commutator"
    CLASS_CHECK = "class-check"
    T1_TRACE = "t1-trace"


class FunctionSpec(BaseModel):
    """
    A smooth function of one point in R^d.

    Exactly one of `profile` (built-in radial profile) or `expression` (sympy
    expression in x / x1..xd) must be set; `times` multiplies by another function.
    """

    model_config = ConfigDict(extra="forbid")

    profile: str | None = Field(default=None, description="Built-in profile identifier")
    expression: str | None = Field(default=None, description="Sympy expression")
    params: dict[str, float] = Field(default_factory=dict, description="Profile parameters")
    support_radius: float | None = Field(
        default=None, gt=0, description="Declared support radius for expressions"
    )
    times: "FunctionSpec | None" = Field(default=None, description="Optional factor")


class TruncationSpec(BaseModel):
    """σ_ε(x, ξ) = σ(x, ξ) u(εx, εξ)."""

    model_config = ConfigDict(extra="forbid")

    epsilon: float = Field(gt=0, le=1, description="Truncation parameter ε in (0, 1]")
    window: FunctionSpec = Field(
        default_factory=lambda: FunctionSpec(profile="window"),
        description="Radial window on R^{2d} with u(0) = 1",
    )


class SymbolFamily(str, Enum):
    """Symbol families that can be built from a config."""

    CONSTANT = "constant"
    SEPARABLE = "separable"
    ELEMENTARY = "elementary"
    EXPRESSION = "expression"


class SymbolSpec(BaseModel):
    """Symbol family and parameters."""

    model_config = ConfigDict(extra="forbid")

    family: SymbolFamily = Field(description="Symbol family")
    value: float = Field(default=1.0, description="Value of a constant symbol")
    m: FunctionSpec | None = Field(default=None, description="x-factor (separable, elementary)")
    psi: FunctionSpec | None = Field(default=None, description="ξ-factor (separable, elementary)")
    expression: str | None = Field(default=None, description="Expression in x and xi")
    order: float | None = Field(default=None, description="Declared order s")
    order_shift: float = Field(default=0.0, description="Elementary weight exponent s'")
    weight_exponent: float = Field(default=0.0, description="m_j = 2^{j w} m")
    j_max: int = Field(default=2, ge=1, description="Largest dyadic index J_max")
    x_support_radius: float | None = Field(
        default=None, gt=0, description="Declared x-support radius of the symbol"
    )
    max_analytic_order: int = Field(default=16, ge=0, description="Analytic derivative cap")
    allow_finite_differences: bool = Field(
        default=True, description="Fall back to finite differences above the cap"
    )
    truncate: TruncationSpec | None = Field(default=None, description="Optional truncation")


class GridSpec(BaseModel):
    """Uniform torus [-L, L)^d with n points per dimension."""

    model_config = ConfigDict(extra="forbid")

    dimension: int = Field(default=1, description="Dimension d (1 or 2)")
    points_per_dim: int = Field(default=256, description="Points per dimension n (even)")
    half_length: float = Field(default=16 * math.pi, gt=0, description="Half length L")
    size_cap: int = Field(default=4096, ge=1, description="Cap on n^d for dense matrices")
    safe_radius: float | None = Field(
        default=None, gt=0, description="Torus-safe radius (default L/2)"
    )

    @property
    def resolved_safe_radius(self) -> float:
        return self.safe_radius if self.safe_radius is not None else self.half_length / 2

    @property
    def spacing(self) -> float:
        return 2 * self.half_length / self.points_per_dim


class ArmSpec(BaseModel):
    """Geometric progression start * ratio**i, i < count."""

    model_config = ConfigDict(extra="forbid")

    start: float = Field(gt=0)
    ratio: float = Field(gt=0)
    count: int = Field(ge=1)

    def values(self) -> list[float]:
        return [self.start * self.ratio**i for i in range(self.count)]


class ScheduleSpec(BaseModel):
    """Sweep arms and the trend criterion."""

    model_config = ConfigDict(extra="forbid")

    translation: ArmSpec | None = Field(
        default_factory=lambda: ArmSpec(start=1.0, ratio=2.0, count=4),
        description="|x0| progression at fixed R",
    )
    translation_radius: float = Field(default=1.0, gt=0, description="R on the translation arm")
    dilation: ArmSpec | None = Field(
        default_factory=lambda: ArmSpec(start=1.0, ratio=2.0, count=4),
        description="Growing R at x0 = 0",
    )
    concentration: ArmSpec | None = Field(
        default_factory=lambda: ArmSpec(start=8.0, ratio=0.5, count=3),
        description="Shrinking R at x0 = 0",
    )
    min_points_per_radius: float = Field(default=4.0, gt=0, description="Resolution floor R/h")
    final_fraction: float = Field(default=0.25, gt=0, description="Trend: last <= f * first")
    max_step_growth: float = Field(default=1.1, ge=1, description="Trend: step growth bound")
    noise_floor: float = Field(default=1e-13, ge=0, description="Values treated as zero")


class BumpSpec(BaseModel):
    """Normalized bumps φ1, φ2 and their offsets x1, x2."""

    model_config = ConfigDict(extra="forbid")

    profile: str = Field(default="standard", description="Profile of φ1")
    second_profile: str | None = Field(default=None, description="Profile of φ2 (default φ1)")
    order: int = Field(default=1, ge=0, description="Normalization order M")
    x1: list[float] | None = Field(default=None, description="Offset of φ1 (default 0)")
    x2: list[float] | None = Field(default=None, description="Offset of φ2 (default 0)")
    resolution: int = Field(default=4096, ge=16, description="Normalization samples per dim")


class ExpansionSpec(BaseModel):
    """Truncation order(s) of the transpose expansion."""

    model_config = ConfigDict(extra="forbid")

    order: int = Field(default=2, ge=1, description="Expansion order N")
    orders: list[int] | None = Field(default=None, description="Orders to sweep (default 1..N)")

    def resolved_orders(self) -> list[int]:
        return self.orders if self.orders else list(range(1, self.order + 1))


class SpectrumSpec(BaseModel):
    """Singular-value tail settings."""

    model_config = ConfigDict(extra="forbid")

    k_list: list[int] | None = Field(default=None, description="Tail indices (default n^d/4)")
    effective_rank_eps: list[float] = Field(default_factory=lambda: [1e-3])
    control_threshold: float = Field(
        default=0.99, description="Tail ratio at which an operator is labelled non-compact"
    )


class OrderReductionSpec(BaseModel):
    """Settings of the σ = σ̃ + Σ ξ_j σ_j decomposition check."""

    model_config = ConfigDict(extra="forbid")

    window: FunctionSpec = Field(default_factory=lambda: FunctionSpec(profile="window"))
    quadrature_nodes: int = Field(default=64, ge=16)
    samples: int = Field(default=1000, ge=1)
    x_radius: float = Field(default=4.0, gt=0)
    xi_radius: float = Field(default=1.0, gt=0)
    strict: bool = Field(default=False, description="Raise on quadrature convergence flags")


class CommutatorSpec(BaseModel):
    """Multiplier a and control symbol for commutator experiments."""

    model_config = ConfigDict(extra="forbid")

    multiplier: FunctionSpec = Field(default_factory=lambda: FunctionSpec(expression="tanh(x)"))
    control: SymbolSpec | None = Field(default=None, description="Non-vanishing control symbol")
    transpose_orders: list[int] = Field(default_factory=lambda: [1, 2])
    order_reduction: OrderReductionSpec | None = Field(default=None)
    sweep: bool = Field(default=False, description="Emit the A/B weak compactness sweep")


class DerivativeSpec(BaseModel):
    """A pair (α, β) of multi-index entries."""

    model_config = ConfigDict(extra="forbid")

    alpha: list[int]
    beta: list[int]


class ClassCheckSpec(BaseModel):
    """Shell sampling of symbol-class decay."""

    model_config = ConfigDict(extra="forbid")

    derivatives: list[DerivativeSpec] | None = Field(default=None, description="Default α=β=0")
    order: float | None = Field(default=None, description="Order s (default symbol order)")
    shells: list[float] = Field(default_factory=lambda: [1.0, 4.0, 16.0, 64.0, 256.0])
    samples_per_shell: int = Field(default=1024, ge=16)
    cordes_order: int | None = Field(default=None, ge=0)
    fd_step: float = Field(default=1e-3, gt=0)
    fd_points: int = Field(default=16, ge=1)
    peetre_samples: int = Field(default=0, ge=0)


class CmoProxySpec(BaseModel):
    """|x|-shells for the sup-decay proxy of σ(x, 0)."""

    model_config = ConfigDict(extra="forbid")

    radii: list[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0, 16.0])
    samples_per_shell: int = Field(default=256, ge=1)


class ExperimentConfig(BaseModel):
    """Complete definition of one experiment run."""

    model_config = ConfigDict(extra="forbid")

    kind: ExperimentKind | None = Field(default=None, description="Experiment kind")
    description: str = Field(default="", description="Free text")
    symbol: SymbolSpec = Field(description="Symbol under test")
    grid: GridSpec = Field(default_factory=GridSpec)
    schedule: ScheduleSpec = Field(default_factory=ScheduleSpec)
    bumps: BumpSpec = Field(default_factory=BumpSpec)
    expansion: ExpansionSpec = Field(default_factory=ExpansionSpec)
    spectrum: SpectrumSpec = Field(default_factory=SpectrumSpec)
    commutator: CommutatorSpec = Field(default_factory=CommutatorSpec)
    class_check: ClassCheckSpec = Field(default_factory=ClassCheckSpec)
    cmo_proxy: CmoProxySpec = Field(default_factory=CmoProxySpec)
    assertions: dict[str, float | bool] = Field(
        default_factory=dict, description="Declared assertions: name -> threshold"
    )
    export_matrices: bool = Field(default=False, description="Export dense matrices")
    output_dir: str | None = Field(default=None, description="Output directory")
    seed: int | None = Field(default=None, ge=0, lt=2**64, description="Seed (u64)")
    jobs: int = Field(default=1, ge=1, description="Worker threads")


FunctionSpec.model_rebuild()
