"""Schema module for psido-lab data models."""

from psido_lab.schema.schema import (
    ArmSpec,
    AssertionVerdict,
    BumpSpec,
    ClassCheckSpec,
    ClassEstimate,
    CmoProxySpec,
    CommutatorSpec,
    DerivativeMode,
    DerivativeSpec,
    ExpansionSpec,
    ExperimentConfig,
    ExperimentKind,
    ExperimentResult,
    FunctionSpec,
    GridSpec,
    MultiIndex,
    OrderReductionSpec,
    RunManifest,
    RunStatus,
    ScheduleSpec,
    SpectrumReport,
    SpectrumSpec,
    SweepArm,
    SweepKind,
    SweepPoint,
    SymbolFamily,
    SymbolSpec,
    TruncationSpec,
)

__all__ = [
    "ArmSpec",
    "AssertionVerdict",
    "BumpSpec",
    "ClassCheckSpec",
    "ClassEstimate",
    "CmoProxySpec",
    "CommutatorSpec",
    "DerivativeMode",
    "DerivativeSpec",
    "ExpansionSpec",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentResult",
    "FunctionSpec",
    "GridSpec",
    "MultiIndex",
    "OrderReductionSpec",
    "RunManifest",
    "RunStatus",
    "ScheduleSpec",
    "SpectrumReport",
    "SpectrumSpec",
    "SweepArm",
    "SweepKind",
    "SweepPoint",
    "SymbolFamily",
    "SymbolSpec",
    "TruncationSpec",
]
