"""
Symbol calculus.

Asymptotic transpose expansions, ε-truncation of symbols, and the order reduction
σ = σ(x,0)ψ(ξ) + Σ_j ξ_j σ_j(x, ξ) obtained from the fundamental theorem of calculus.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.special import roots_legendre

from psido_lab.errors import InvalidSymbolError, OrderExceededError, QuadratureConvergenceError
from psido_lab.schema.schema import MultiIndex
from psido_lab.symbols.base import Symbol, as_points, result_shape
from psido_lab.symbols.families import LinearCombinationSymbol
from psido_lab.symbols.functions import SmoothFunction, build_profile

logger = logging.getLogger(__name__)

MIN_QUADRATURE_NODES = 16
CONVERGENCE_TOLERANCE = 1e-8


def _reduced_limit(limit: int | None, used: int) -> int | None:
    return None if limit is None else max(limit - used, 0)


class TransposeExpansion(Symbol):
    """
    σ*_N(x, ξ) = Σ_{|α| < N} i^{-|α|} / α! ∂_x^α ∂_ξ^α c(x, ξ) with c(y, ξ) = σ(y, -ξ),
    that is Σ_{|α| < N} i^{|α|} / α! (∂_x^α ∂_ξ^α σ)(x, -ξ).

    Derivatives of the expansion are
    ∂_x^{α'} ∂_ξ^{β'} σ*_N = Σ_α i^{|α|}/α! (-1)^{|β'|} (∂_x^{α+α'} ∂_ξ^{α+β'} σ)(x, -ξ).
    """

    def __init__(self, base: Symbol, N: int):
        if N < 1:
            raise ValueError(f"expansion order N must be >= 1, got {N}")
        used = 2 * (N - 1)
        limit = base.max_analytic_order
        if limit is not None and used > limit and not base.allow_finite_differences:
            raise OrderExceededError(used, limit, base.name)
        if limit is not None and used > limit:
            logger.warning(
                f"{base.name}: expansion N={N} needs order {used} > {limit}; "
                f"higher terms use finite differences"
            )

        super().__init__(
            base.dimension,
            order=base.order,
            name=f"transpose[{N}]({base.name})",
            max_analytic_order=_reduced_limit(limit, used),
            allow_finite_differences=base.allow_finite_differences,
            x_support_radius=base.x_support_radius,
            xi_support_radius=base.xi_support_radius,
        )
        self.base = base
        self.N = N
        self.terms: list[tuple[complex, MultiIndex]] = [
            ((1j) ** alpha.order / alpha.factorial, alpha)
            for alpha in MultiIndex.enumerate(base.dimension, N - 1)
        ]

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        reflected = -xi
        sign = (-1.0) ** beta.order
        total = np.zeros(result_shape(x, xi), dtype=complex)
        for coeff, gamma in self.terms:
            total += coeff * self.base.derivative(x, reflected, gamma + alpha, gamma + beta)
        return sign * total


def transpose_expansion(sym: Symbol, N: int) -> TransposeExpansion:
    """
    Truncated asymptotic expansion of the transpose symbol.

    Args:
        sym: Symbol σ
        N: Number of graded orders kept (|α| < N)

    Returns:
        σ*_N as a Symbol of the same declared order

    Raises:
        OrderExceededError: If σ cannot supply derivatives of order 2(N - 1)
    """
    return TransposeExpansion(sym, N)


def commutator_transpose_symbol(sym: Symbol, N: int) -> TransposeExpansion:
    """
    Symbol of the transpose side of [T_σ, M_a]ᵀ = -[T_{σ*}, M_a].

    Identical to `transpose_expansion`; kept as its own entry point so commutator
    experiments name both sides.
    """
    return transpose_expansion(sym, N)


class TruncatedSymbol(Symbol):
    """σ_ε(x, ξ) = σ(x, ξ) u(εx, εξ) with derivatives from the product rule."""

    def __init__(self, base: Symbol, epsilon: float, window: SmoothFunction):
        if not 0.0 < epsilon <= 1.0:
            raise InvalidSymbolError(f"epsilon must lie in (0, 1], got {epsilon}", field="epsilon")
        d = base.dimension
        if window.dimension != 2 * d:
            raise InvalidSymbolError(
                f"window must live on R^{2 * d}, got dimension {window.dimension}", field="window"
            )
        if not window.is_compactly_supported:
            raise InvalidSymbolError(f"window {window.name} must be compactly supported", field="window")
        at_origin = complex(window.values(np.zeros((1, 2 * d)), MultiIndex.zero(2 * d))[0])
        if abs(at_origin - 1.0) > 1e-12:
            raise InvalidSymbolError(f"window must equal 1 at the origin, got {at_origin}", field="window")

        reach = window.support_radius / epsilon  # type: ignore[operator]
        x_radius = reach if base.x_support_radius is None else min(reach, base.x_support_radius)
        super().__init__(
            d,
            order=base.order,
            name=f"{base.name}*u(eps={epsilon:g})",
            max_analytic_order=base.max_analytic_order,
            allow_finite_differences=base.allow_finite_differences,
            x_support_radius=x_radius,
            xi_support_radius=reach,
        )
        self.base = base
        self.epsilon = epsilon
        self.window = window

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        x_b, xi_b = np.broadcast_arrays(x, xi)
        scaled = self.epsilon * np.concatenate([x_b, xi_b], axis=-1)
        total = np.zeros(x_b.shape[:-1], dtype=complex)

        for g in product(*(range(a + 1) for a in alpha.entries)):
            for k in product(*(range(b + 1) for b in beta.entries)):
                gamma, delta = MultiIndex(entries=g), MultiIndex(entries=k)
                rest_x, rest_xi = alpha - gamma, beta - delta
                weight = math.prod(math.comb(a, c) for a, c in zip(alpha.entries, g))
                weight *= math.prod(math.comb(b, c) for b, c in zip(beta.entries, k))
                weight *= self.epsilon ** (rest_x.order + rest_xi.order)
                u = self.window.values(scaled, MultiIndex(entries=rest_x.entries + rest_xi.entries))
                total += weight * self.base.derivative(x_b, xi_b, gamma, delta) * u

        return total


def truncate(sym: Symbol, epsilon: float, u: SmoothFunction | None = None) -> TruncatedSymbol:
    """
    Multiply σ by the scaled window u(εx, εξ).

    Args:
        sym: Symbol σ
        epsilon: ε in (0, 1]
        u: Compactly supported window on R^{2d} with u(0, 0) = 1 (default: the
            plateau equal to 1 on the unit ball and 0 outside radius 2)

    Raises:
        InvalidSymbolError: If ε or u violate the preconditions
    """
    window = u if u is not None else build_profile("window", 2 * sym.dimension)
    return TruncatedSymbol(sym, epsilon, window)


class FrequencyZeroSymbol(Symbol):
    """σ̃(x, ξ) = σ(x, 0) ψ(ξ)."""

    def __init__(self, base: Symbol, window: SmoothFunction):
        super().__init__(
            base.dimension,
            order=base.order,
            name=f"{base.name}(x,0)*{window.name}",
            max_analytic_order=base.max_analytic_order,
            allow_finite_differences=base.allow_finite_differences,
            x_support_radius=base.x_support_radius,
            xi_support_radius=window.support_radius,
        )
        self.base = base
        self.window = window

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        origin = np.zeros_like(x)
        at_zero = self.base.derivative(x, origin, alpha, MultiIndex.zero(self.dimension))
        return at_zero * self.window.values(xi, beta)


class ReducedComponentSymbol(Symbol):
    """
    σ_j(x, ξ) = ∫_0^1 ∂_{ξ_j} σ₀(x, tξ) dt by Gauss–Legendre quadrature on [0, 1].

    Derivatives are taken under the integral:
    ∂_x^α ∂_ξ^β σ_j(x, ξ) = ∫_0^1 t^{|β|} (∂_x^α ∂_ξ^{β + e_j} σ₀)(x, tξ) dt.
    """

    def __init__(self, sigma0: Symbol, component: int, quadrature_nodes: int):
        super().__init__(
            sigma0.dimension,
            order=sigma0.order - 1.0,
            name=f"sigma_{component + 1}[{sigma0.name}]",
            max_analytic_order=_reduced_limit(sigma0.max_analytic_order, 1),
            allow_finite_differences=sigma0.allow_finite_differences,
            x_support_radius=sigma0.x_support_radius,
        )
        self.sigma0 = sigma0
        self.component = component
        self.quadrature_nodes = quadrature_nodes

    def integrate(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex, nodes: int
    ) -> np.ndarray:
        """Evaluate the derivative integral with a given number of nodes."""
        u, w = roots_legendre(nodes)
        t = 0.5 * (u + 1.0)
        weights = 0.5 * w
        shifted = beta + MultiIndex.unit(self.dimension, self.component)
        total = np.zeros(result_shape(x, xi), dtype=complex)
        for tk, wk in zip(t, weights):
            total += wk * tk**beta.order * self.sigma0.derivative(x, tk * xi, alpha, shifted)
        return total

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        return self.integrate(x, xi, alpha, beta, self.quadrature_nodes)


@dataclass
class OrderReduction:
    """Decomposition σ = σ̃ + Σ_j ξ_j σ_j with σ̃(x, ξ) = σ(x, 0) ψ(ξ)."""

    tilde_part: Symbol
    sigma0: Symbol
    components: list[ReducedComponentSymbol]
    window: SmoothFunction
    quadrature_nodes: int
    convergence_flags: list[bool] = field(default_factory=list)
    max_changes: list[float] = field(default_factory=list)

    def reconstruct(self, x: object, xi: object) -> np.ndarray:
        """Σ_j ξ_j σ_j(x, ξ) at raw coordinates."""
        d = self.sigma0.dimension
        x_pts, xi_pts = as_points(x, d), as_points(xi, d)
        zero = MultiIndex.zero(d)
        total = np.zeros(result_shape(x_pts, xi_pts), dtype=complex)
        for j, comp in enumerate(self.components):
            total += xi_pts[..., j] * comp.derivative(x_pts, xi_pts, zero, zero)
        return total

    def reconstruction_error(self, x: object, xi: object) -> float:
        """max |Σ_j ξ_j σ_j - σ₀| over the given points."""
        return float(np.max(np.abs(self.reconstruct(x, xi) - self.sigma0.eval(x, xi))))

    @property
    def converged(self) -> bool:
        return not any(self.convergence_flags)


def _check_points(dimension: int) -> tuple[np.ndarray, np.ndarray]:
    """Fixed (x, ξ) check points on [-2, 2]^d × [-2, 2]^d."""
    axis = np.linspace(-2.0, 2.0, 5)
    grid = np.array(list(product(axis, repeat=dimension)))
    x = np.repeat(grid, len(grid), axis=0)
    xi = np.tile(grid, (len(grid), 1))
    return x, xi


def order_reduce(
    sym: Symbol,
    psi: SmoothFunction | None = None,
    quadrature_nodes: int = 64,
    strict: bool = False,
) -> OrderReduction:
    """
    Split σ into its ξ = 0 trace and components of one order lower.

    Each component is checked by doubling the node count on fixed check points;
    a change above 1e-8 · max(|value|, 1) sets its convergence flag.

    Args:
        sym: Symbol σ with first ξ-derivatives
        psi: Window with ψ(0) = 1 (default: plateau 1 on |ξ| <= 1, 0 for |ξ| >= 2)
        quadrature_nodes: Gauss–Legendre nodes (>= 16)
        strict: Raise instead of flagging when a component does not converge

    Returns:
        OrderReduction with σ̃, σ₀ and the components σ_j

    Raises:
        QuadratureConvergenceError: If strict and a component fails the doubling check
    """
    if quadrature_nodes < MIN_QUADRATURE_NODES:
        raise ValueError(f"quadrature_nodes must be >= {MIN_QUADRATURE_NODES}, got {quadrature_nodes}")
    d = sym.dimension
    window = psi if psi is not None else build_profile("window", d)
    if window.dimension != d:
        raise InvalidSymbolError(f"ψ must live on R^{d}", field="psi")
    at_origin = complex(window.values(np.zeros((1, d)), MultiIndex.zero(d))[0])
    if abs(at_origin - 1.0) > 1e-12:
        raise InvalidSymbolError(f"ψ(0) must equal 1, got {at_origin}", field="psi")

    tilde = FrequencyZeroSymbol(sym, window)
    sigma0 = LinearCombinationSymbol([(1.0, sym), (-1.0, tilde)], name=f"{sym.name}-tilde")
    components = [ReducedComponentSymbol(sigma0, j, quadrature_nodes) for j in range(d)]
    reduction = OrderReduction(tilde, sigma0, components, window, quadrature_nodes)

    x, xi = _check_points(d)
    zero = MultiIndex.zero(d)
    for comp in components:
        coarse = comp.integrate(x, xi, zero, zero, quadrature_nodes)
        fine = comp.integrate(x, xi, zero, zero, 2 * quadrature_nodes)
        change = float(np.max(np.abs(fine - coarse) / np.maximum(np.abs(fine), 1.0)))
        flagged = change > CONVERGENCE_TOLERANCE
        reduction.convergence_flags.append(flagged)
        reduction.max_changes.append(change)
        if flagged:
            if strict:
                raise QuadratureConvergenceError(comp.component, change, quadrature_nodes)
            logger.warning(
                f"{comp.name}: doubling {quadrature_nodes} nodes changed the value by {change:.3e}"
            )

    logger.debug(f"Order reduction of {sym.name}: flags={reduction.convergence_flags}")
    return reduction
