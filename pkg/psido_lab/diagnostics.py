"""
Compactness diagnostics.

Normalized bumps and their translates, the weak compactness, weak boundedness and
L²-condition statistics, T(1) traces with the CMO decay proxy, singular value tails,
transpose residuals, and the sweep schedule with its trend criterion.
"""

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.stats import qmc

from psido_lab.calculus import transpose_expansion
from psido_lab.discretization import (
    DEFAULT_SIZE_CAP,
    Grid,
    GridFunction,
    OperatorMatrix,
    apply,
    assemble,
    bilinear_pair,
    sample_function,
)
from psido_lab.errors import (
    InvalidSymbolError,
    SpectrumError,
    SupportEscapesTorusError,
    UnknownProfileError,
)
from psido_lab.parallel import ordered_map
from psido_lab.schema.schema import (
    MultiIndex,
    ScheduleSpec,
    SpectrumReport,
    SweepArm,
    SweepKind,
    SweepPoint,
)
from psido_lab.symbols.base import Symbol
from psido_lab.symbols.functions import (
    PartialDerivativeFunction,
    SmoothFunction,
    build_profile,
)

logger = logging.getLogger(__name__)

# Bump profiles and the parameters handed to build_profile; all vanish for |x| >= 1.
BUMP_PROFILES: dict[str, tuple[str, dict[str, float]]] = {
    "standard": ("standard", {}),
    "plateau": ("plateau", {"inner": 0.5, "outer": 1.0}),
}

DEFAULT_RESOLUTION = 4096
MAX_NORMALIZATION_POINTS = 2**20


class BumpFunction(SmoothFunction):
    """
    A normalized bump c · profile of order M.

    The constant c makes max_{|α| <= M} sup |∂^α (c · profile)| equal to 1 on the
    normalization grid.
    """

    def __init__(
        self,
        profile: SmoothFunction,
        order: int,
        normalization: float,
        profile_id: str,
        resolution: int = DEFAULT_RESOLUTION,
    ):
        super().__init__(profile.dimension, f"bump[{profile_id}, M={order}]", support_radius=1.0)
        self.profile = profile
        self.order = order
        self.normalization = normalization
        self.profile_id = profile_id
        self.resolution = resolution

    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        return self.normalization * self.profile.values(points, alpha)

    def partial(self, axis: int) -> "BumpFunction":
        """∂_j φ as a bump of order M - 1 with the same constant."""
        if self.order < 1:
            raise ValueError("a bump of order 0 has no normalized derivative")
        return BumpFunction(
            PartialDerivativeFunction(self.profile, axis),
            self.order - 1,
            self.normalization,
            f"d{axis + 1}.{self.profile_id}",
            self.resolution,
        )


def normalization_points(dimension: int, resolution: int) -> np.ndarray:
    """Grid on [-1, 1]^d used for bump normalization (at most 2^20 points)."""
    per_dim = min(resolution, int(round(MAX_NORMALIZATION_POINTS ** (1.0 / dimension))))
    axis = np.linspace(-1.0, 1.0, per_dim)
    mesh = np.meshgrid(*([axis] * dimension), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=-1)


def derivative_sup(func: SmoothFunction, order: int, resolution: int = DEFAULT_RESOLUTION) -> float:
    """max_{|α| <= order} max |∂^α f| over the normalization grid."""
    points = normalization_points(func.dimension, resolution)
    return max(
        float(np.max(np.abs(func.values(points, alpha))))
        for alpha in MultiIndex.enumerate(func.dimension, order)
    )


def make_bump(
    M: int, profile_id: str, dimension: int = 1, resolution: int = DEFAULT_RESOLUTION
) -> BumpFunction:
    """
    Build a normalized bump of order M.

    Args:
        M: Order (>= 0)
        profile_id: One of BUMP_PROFILES
        dimension: Dimension d
        resolution: Normalization samples per dimension

    Raises:
        UnknownProfileError: If the profile id is not a bump profile
    """
    if M < 0:
        raise ValueError(f"bump order must be >= 0, got {M}")
    if profile_id not in BUMP_PROFILES:
        raise UnknownProfileError(profile_id, list(BUMP_PROFILES))
    name, params = BUMP_PROFILES[profile_id]
    profile = build_profile(name, dimension, params)
    if profile.support_radius is None or profile.support_radius > 1.0 + 1e-12:
        raise InvalidSymbolError(f"bump profile {profile_id} is not supported in the unit ball")

    peak = derivative_sup(profile, M, resolution)
    bump = BumpFunction(profile, M, 1.0 / peak, profile_id, resolution)
    logger.debug(f"{bump.name}: normalization constant {bump.normalization:.17g}")
    return bump


def translate_dilate(
    phi: SmoothFunction,
    x0: Sequence[float] | float,
    R: float,
    grid: Grid,
    safe_radius: float | None = None,
) -> GridFunction:
    """
    Sample φ^{x₀,R}(x) = φ((x - x₀)/R) on the grid.

    Raises:
        SupportEscapesTorusError: If the ball B(x₀, R) leaves |x| <= safe_radius (default L/2)
    """
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    center = np.broadcast_to(np.asarray(x0, dtype=float), (grid.dimension,))
    limit = grid.half_length / 2.0 if safe_radius is None else safe_radius
    reach = R * (phi.support_radius if phi.support_radius is not None else np.inf)
    center_norm = float(np.linalg.norm(center))
    if center_norm + reach > limit * (1.0 + 1e-12):
        raise SupportEscapesTorusError(center_norm, R, limit)
    scaled = (grid.points - center) / R
    return GridFunction(grid, phi.values(scaled, MultiIndex.zero(grid.dimension)))


def _center(x0: Sequence[float] | float, offset: Sequence[float] | float | None, d: int) -> np.ndarray:
    base = np.broadcast_to(np.asarray(x0, dtype=float), (d,))
    if offset is None:
        return base.copy()
    return base + np.broadcast_to(np.asarray(offset, dtype=float), (d,))


def weak_compactness_stat(
    op: OperatorMatrix,
    phi1: SmoothFunction,
    phi2: SmoothFunction,
    x1: Sequence[float] | float | None,
    x2: Sequence[float] | float | None,
    x0: Sequence[float] | float,
    R: float,
    safe_radius: float | None = None,
) -> float:
    """R^{-d} |⟨T φ₁^{x₀+x₁,R}, φ₂^{x₀+x₂,R}⟩|."""
    grid = op.grid
    d = grid.dimension
    f = translate_dilate(phi1, _center(x0, x1, d), R, grid, safe_radius)
    g = translate_dilate(phi2, _center(x0, x2, d), R, grid, safe_radius)
    return abs(bilinear_pair(op.apply(f), g)) / R**d


def weak_boundedness_stat(
    op: OperatorMatrix,
    phi1: SmoothFunction,
    phi2: SmoothFunction,
    x1: Sequence[float] | float | None,
    x2: Sequence[float] | float | None,
    R: float,
    safe_radius: float | None = None,
) -> float:
    """R^{-d} |⟨T φ₁^{x₁,R}, φ₂^{x₂,R}⟩|, the weak compactness statistic at x₀ = 0."""
    return weak_compactness_stat(op, phi1, phi2, x1, x2, 0.0, R, safe_radius)


def l2_condition_stat(
    op: OperatorMatrix,
    phi: SmoothFunction,
    x0: Sequence[float] | float,
    R: float,
    safe_radius: float | None = None,
) -> float:
    """R^{-d/2} ‖T φ^{x₀,R}‖_{L²}."""
    grid = op.grid
    f = translate_dilate(phi, _center(x0, None, grid.dimension), R, grid, safe_radius)
    return op.apply(f).l2_norm() / R ** (grid.dimension / 2)


def ab_terms(
    op: OperatorMatrix,
    a: SmoothFunction | Callable[[np.ndarray], object] | complex,
    phi1: SmoothFunction,
    phi2: SmoothFunction,
    x1: Sequence[float] | float | None,
    x2: Sequence[float] | float | None,
    x0: Sequence[float] | float,
    R: float,
    safe_radius: float | None = None,
) -> tuple[float, float]:
    """
    Split the commutator statistic with the recentred multiplier ã = a - a(x₀ + x₁).

    Returns:
        (A, B) with A = R^{-d}|⟨T(ã φ₁), φ₂⟩| and B = R^{-d}|⟨ã T φ₁, φ₂⟩|,
        bumps taken at (x₀ + x₁, R) and (x₀ + x₂, R)
    """
    grid = op.grid
    d = grid.dimension
    c1 = _center(x0, x1, d)
    f = translate_dilate(phi1, c1, R, grid, safe_radius)
    g = translate_dilate(phi2, _center(x0, x2, d), R, grid, safe_radius)

    if isinstance(a, SmoothFunction):
        at_center = complex(a.values(c1[np.newaxis, :], MultiIndex.zero(d))[0])
    elif callable(a):
        at_center = complex(np.asarray(a(c1[0] if d == 1 else c1[np.newaxis, :])).reshape(-1)[0])
    else:
        at_center = complex(a)
    recentred = GridFunction(grid, sample_function(a, grid) - at_center)

    a_term = abs(bilinear_pair(op.apply(recentred * f), g)) / R**d
    b_term = abs(bilinear_pair(recentred * op.apply(f), g)) / R**d
    return a_term, b_term


@dataclass
class T1Trace:
    """T_σ(1) computed through `apply` and directly as σ(x_m, 0)."""

    applied: GridFunction
    direct: GridFunction

    @property
    def max_abs_difference(self) -> float:
        return float(np.max(np.abs(self.applied.values - self.direct.values)))


def t1_trace(sym: Symbol, grid: Grid, jobs: int = 1) -> T1Trace:
    """Both paths of T_σ(1); on the torus only the ξ = 0 mode of 1 survives."""
    applied = apply(sym, GridFunction.constant(grid), jobs)
    zero = MultiIndex.zero(grid.dimension)
    direct = sym.derivative(grid.points, np.zeros_like(grid.points), zero, zero)
    return T1Trace(applied, GridFunction(grid, direct))


def t1_decay_profile(
    sym: Symbol, radii: Sequence[float], samples: int, seed: int = 0
) -> list[tuple[float, float, float]]:
    """
    CMO proxy: sampled sup |σ(x, 0)| over shells of |x|.

    Shell i is [r_i, r_{i+1}); the last shell is [r_K, 2 r_K).

    Returns:
        (lower radius, upper radius, sup) per shell
    """
    bounds = [float(r) for r in radii]
    if not bounds or bounds[0] < 0 or any(b <= a for a, b in zip(bounds, bounds[1:])):
        raise ValueError(f"radii must be non-negative and increasing, got {bounds}")
    d = sym.dimension
    zero = MultiIndex.zero(d)
    rows = []
    for i, lo in enumerate(bounds):
        hi = bounds[i + 1] if i + 1 < len(bounds) else 2.0 * lo
        u = qmc.Halton(d=2, scramble=True, seed=seed + i).random(samples)
        r = lo + u[:, 0] * (hi - lo)
        if d == 1:
            x = (r * np.where(u[:, 1] < 0.5, -1.0, 1.0))[:, np.newaxis]
        else:
            angle = 2.0 * np.pi * u[:, 1]
            x = r[:, np.newaxis] * np.stack([np.cos(angle), np.sin(angle)], axis=-1)
        values = sym.derivative(x, np.zeros_like(x), zero, zero)
        rows.append((lo, hi, float(np.max(np.abs(values)))))
    return rows


def svd_tail(op: OperatorMatrix, k_list: Sequence[int]) -> SpectrumReport:
    """
    Full singular value list with tail ratios at the requested indices.

    Falls back to the gesvd driver when the default driver does not converge.

    Raises:
        SpectrumError: If the SVD fails or a k lies outside 1..n^d
    """
    entries = op.entries
    if not np.all(np.isfinite(entries)):
        raise SpectrumError("matrix has non-finite entries", entries.shape)
    try:
        values = scipy.linalg.svdvals(entries)
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.warning(f"{op.label}: svdvals failed ({e}); retrying with gesvd")
        try:
            values = scipy.linalg.svd(entries, compute_uv=False, lapack_driver="gesvd")
        except (np.linalg.LinAlgError, ValueError) as e2:
            raise SpectrumError(f"SVD did not converge: {e2}", entries.shape) from e2

    ks = [int(k) for k in k_list]
    bad = [k for k in ks if not 1 <= k <= len(values)]
    if bad:
        raise SpectrumError(f"tail indices {bad} outside 1..{len(values)}", entries.shape)
    ordered = np.sort(np.maximum(values, 0.0))[::-1]
    return SpectrumReport(singular_values=ordered.tolist(), requested_k=ks)


def transpose_residual(
    sym: Symbol,
    N: int,
    grid: Grid,
    safe_radius: float | None = None,
    size_cap: int = DEFAULT_SIZE_CAP,
    jobs: int = 1,
) -> float:
    """
    Spectral norm of the torus-safe block of M(T_σ)ᵀ - M(T_{σ*_N}).

    Rows and columns are kept where max_a |x_a| <= safe_radius (default L/2). The
    value is the norm of that block only, not ‖M(T_σ)ᵀ - M(T_{σ*_N})‖_op over the
    full grid: entries coupling to the seam at |x_a| near L are excluded.
    """
    return transpose_residuals(sym, [N], grid, safe_radius, size_cap, jobs)[0]


def safe_block_norm(entries: np.ndarray, mask: np.ndarray) -> float:
    """Spectral norm of the rows and columns selected by mask."""
    block = entries[np.ix_(mask, mask)]
    return float(scipy.linalg.svdvals(block)[0]) if block.size else 0.0


def transpose_residuals(
    sym: Symbol,
    orders: Sequence[int],
    grid: Grid,
    safe_radius: float | None = None,
    size_cap: int = DEFAULT_SIZE_CAP,
    jobs: int = 1,
    forward: OperatorMatrix | None = None,
) -> list[float]:
    """`transpose_residual` for several N, assembling T_σ once."""
    if forward is None:
        forward = assemble(sym, grid, size_cap, jobs)
    mask = grid.safe_mask(safe_radius)
    residuals = []
    for N in orders:
        reflected = assemble(transpose_expansion(sym, N), grid, size_cap, jobs)
        residuals.append(safe_block_norm(forward.entries.T - reflected.entries, mask))
        logger.debug(f"{sym.name}: transpose residual at N={N} is {residuals[-1]:.3e}")
    return residuals


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ScheduledPoint:
    """One (arm, x₀, R) entry of a sweep schedule."""

    arm: str
    x0: tuple[float, ...]
    R: float

    @property
    def x0_norm(self) -> float:
        return float(np.linalg.norm(self.x0))


def sweep_schedule(spec: ScheduleSpec, grid: Grid) -> list[ScheduledPoint]:
    """
    Points of the three arms in schedule order.

    Translation moves x₀ = t e₁ (snapped to a multiple of h) at R = translation_radius;
    dilation and concentration move R at x₀ = 0.
    """
    d = grid.dimension
    origin = (0.0,) * d
    points: list[ScheduledPoint] = []
    if spec.translation is not None:
        for t in spec.translation.values():
            snapped = round(t / grid.spacing) * grid.spacing
            points.append(
                ScheduledPoint(SweepArm.TRANSLATION.value, (snapped,) + (0.0,) * (d - 1), spec.translation_radius)
            )
    if spec.dilation is not None:
        points.extend(ScheduledPoint(SweepArm.DILATION.value, origin, r) for r in spec.dilation.values())
    if spec.concentration is not None:
        points.extend(
            ScheduledPoint(SweepArm.CONCENTRATION.value, origin, r) for r in spec.concentration.values()
        )
    return points


def validate_schedule(
    points: Sequence[ScheduledPoint],
    grid: Grid,
    offsets: Sequence[Sequence[float]],
    safe_radius: float | None = None,
    min_points_per_radius: float = 4.0,
) -> list[str]:
    """
    Check torus safety and resolution for every scheduled point.

    Returns:
        One message per violation (empty when the schedule is valid)
    """
    limit = grid.half_length / 2.0 if safe_radius is None else safe_radius
    reach = max((float(np.linalg.norm(o)) for o in offsets), default=0.0)
    floor = min_points_per_radius * grid.spacing
    errors = []
    for p in points:
        extent = p.x0_norm + reach + p.R
        if extent > limit * (1.0 + 1e-12):
            errors.append(
                f"schedule.{p.arm}: |x0| + max|x_i| + R = {extent:g} exceeds the safe radius {limit:g}"
            )
        if p.R < floor * (1.0 - 1e-12):
            errors.append(
                f"schedule.{p.arm}: R = {p.R:g} is below the resolution floor "
                f"{min_points_per_radius:g}·h = {floor:g}"
            )
    return errors


def evaluate_sweep(
    points: Sequence[ScheduledPoint],
    statistic: Callable[[ScheduledPoint], float],
    kind: SweepKind,
    jobs: int = 1,
) -> list[SweepPoint]:
    """Evaluate a statistic on every scheduled point; results keep schedule order."""
    values = ordered_map(statistic, points, jobs)
    return [
        SweepPoint(arm=p.arm, x0=p.x0, R=p.R, statistic=float(v), kind=kind)
        for p, v in zip(points, values)
    ]


def ab_sweep(
    op: OperatorMatrix,
    a: SmoothFunction | Callable[[np.ndarray], object] | complex,
    phi1: SmoothFunction,
    phi2: SmoothFunction,
    x1: Sequence[float] | float | None,
    x2: Sequence[float] | float | None,
    points: Sequence[ScheduledPoint],
    safe_radius: float | None = None,
    jobs: int = 1,
) -> tuple[list[SweepPoint], list[SweepPoint]]:
    """
    `ab_terms` on every scheduled point.

    Returns:
        (A points, B points) tagged A-term and B-term, in schedule order
    """
    terms = ordered_map(
        lambda p: ab_terms(op, a, phi1, phi2, x1, x2, p.x0, p.R, safe_radius), points, jobs
    )
    a_points = [
        SweepPoint(arm=p.arm, x0=p.x0, R=p.R, statistic=float(A), kind=SweepKind.A_TERM)
        for p, (A, _) in zip(points, terms)
    ]
    b_points = [
        SweepPoint(arm=p.arm, x0=p.x0, R=p.R, statistic=float(B), kind=SweepKind.B_TERM)
        for p, (_, B) in zip(points, terms)
    ]
    return a_points, b_points


def trend_passes(
    values: Sequence[float],
    final_fraction: float = 0.25,
    max_step_growth: float = 1.1,
    noise_floor: float = 1e-13,
) -> bool:
    """
    Decay criterion along one arm.

    Passes when every value is within the noise floor of zero, or when the last
    value is at most final_fraction times the first and no consecutive step grows
    by more than max_step_growth beyond the noise floor.
    """
    vals = [float(v) for v in values]
    if not vals:
        return True
    if all(abs(v) <= noise_floor for v in vals):
        return True
    if vals[-1] > final_fraction * vals[0] + noise_floor:
        return False
    return all(b <= max_step_growth * a + noise_floor for a, b in zip(vals, vals[1:]))


def arm_trends(sweep: Sequence[SweepPoint], **criterion: float) -> dict[str, bool]:
    """Apply `trend_passes` to each arm of a sweep."""
    arms: dict[str, list[float]] = {}
    for point in sweep:
        arms.setdefault(point.arm, []).append(point.statistic)
    return {arm: trend_passes(vals, **criterion) for arm, vals in arms.items()}
