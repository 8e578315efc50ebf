"""
Symbol families.

Constant, separable, elementary (dyadic), expression-defined and callable
symbols, plus linear combinations of symbols.
"""

import logging
from collections.abc import Callable, Sequence

import numpy as np
import sympy

from psido_lab.errors import InvalidSymbolError
from psido_lab.schema.schema import DerivativeMode, MultiIndex
from psido_lab.symbols.base import (
    DEFAULT_MAX_ANALYTIC_ORDER,
    Symbol,
    as_complex,
    result_shape,
)
from psido_lab.symbols.expressions import CompiledExpression
from psido_lab.symbols.functions import SmoothFunction

logger = logging.getLogger(__name__)

ANNULUS_INNER = 0.5
ANNULUS_OUTER = 2.0


class ConstantSymbol(Symbol):
    """σ ≡ value."""

    def __init__(self, value: complex = 1.0, dimension: int = 1):
        super().__init__(dimension, order=0.0, name=f"constant({value})", max_analytic_order=None)
        self.value = value

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        shape = result_shape(x, xi)
        if alpha.order + beta.order > 0:
            return np.zeros(shape, dtype=complex)
        return np.full(shape, self.value, dtype=complex)


class SeparableSymbol(Symbol):
    """σ(x, ξ) = m(x) ψ(ξ); derivatives factor as m^{(α)}(x) ψ^{(β)}(ξ)."""

    def __init__(
        self,
        m: SmoothFunction,
        psi: SmoothFunction,
        order: float = 0.0,
        name: str | None = None,
        max_analytic_order: int | None = DEFAULT_MAX_ANALYTIC_ORDER,
        allow_finite_differences: bool = True,
    ):
        if m.dimension != psi.dimension:
            raise InvalidSymbolError("m and ψ must share the dimension", field="psi")
        super().__init__(
            m.dimension,
            order=order,
            name=name or f"{m.name} x {psi.name}",
            max_analytic_order=max_analytic_order,
            allow_finite_differences=allow_finite_differences,
            x_support_radius=m.support_radius,
            xi_support_radius=psi.support_radius,
        )
        self.m = m
        self.psi = psi

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        return self.m.values(x, alpha) * self.psi.values(xi, beta)


def make_separable(
    m: SmoothFunction, psi: SmoothFunction, order: float = 0.0, name: str | None = None
) -> SeparableSymbol:
    """
    Build σ(x, ξ) = m(x) ψ(ξ).

    With compactly supported ψ the symbol belongs to every order s <= 0; the
    declared order is recorded as given.
    """
    if not psi.is_compactly_supported:
        logger.debug(f"ψ={psi.name} has no declared support radius; order {order:g} is nominal")
    return SeparableSymbol(m, psi, order=order, name=name)


class DyadicFamily:
    """
    The family m_j(x) = 2^{j w} m(x), j = 0, 1, 2, ...

    Uniform derivative bounds in j hold for w <= 0; they are a documented
    assumption of the family, not a checked property.
    """

    def __init__(self, base: SmoothFunction, weight_exponent: float = 0.0):
        self.base = base
        self.weight_exponent = weight_exponent

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def values(self, j: int, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        return 2.0 ** (j * self.weight_exponent) * self.base.values(points, alpha)


class ElementarySymbol(Symbol):
    """
    σ(x, ξ) = Σ_{j=0}^{J_max} 2^{j s'} m_j(x) ψ(2^{-j} ξ) with ψ supported in 1/2 < |ξ| < 2.

    s' = -1 gives the classical 2^{-j} weights. Only the indices j with
    2^{j-1} < |ξ| < 2^{j+1} contribute at a given ξ.
    """

    def __init__(
        self,
        family: DyadicFamily,
        psi: SmoothFunction,
        order_shift: float = 0.0,
        j_max: int = 2,
        name: str | None = None,
        max_analytic_order: int | None = DEFAULT_MAX_ANALYTIC_ORDER,
        allow_finite_differences: bool = True,
    ):
        if j_max < 1:
            raise InvalidSymbolError(f"J_max must be >= 1, got {j_max}", field="j_max")
        if family.dimension != psi.dimension:
            raise InvalidSymbolError("m_j and ψ must share the dimension", field="psi")
        _check_annulus(psi)
        super().__init__(
            psi.dimension,
            order=order_shift,
            name=name or f"elementary(s'={order_shift:g}, J={j_max})",
            max_analytic_order=max_analytic_order,
            allow_finite_differences=allow_finite_differences,
            x_support_radius=family.base.support_radius,
            xi_support_radius=ANNULUS_OUTER * 2.0**j_max,
        )
        self.family = family
        self.psi = psi
        self.order_shift = order_shift
        self.j_max = j_max

    def dyadic_sum(
        self,
        x: np.ndarray,
        xi: np.ndarray,
        alpha: MultiIndex,
        beta: MultiIndex,
        active_only: bool = True,
    ) -> np.ndarray:
        """
        Sum Σ_j 2^{j s'} ∂^α m_j(x) 2^{-j|β|} ψ^{(β)}(2^{-j} ξ).

        Args:
            active_only: Evaluate ψ only where 2^{j-1} < |ξ| < 2^{j+1}

        Returns:
            Complex array of the broadcast point shape
        """
        total = np.zeros(result_shape(x, xi), dtype=complex)
        xi_norm = np.linalg.norm(xi, axis=-1)

        for j in range(self.j_max + 1):
            scale = 2.0**j
            if active_only:
                mask = (xi_norm > scale * ANNULUS_INNER) & (xi_norm < scale * ANNULUS_OUTER)
                if not mask.any():
                    continue
                psi_vals = np.zeros(xi_norm.shape, dtype=complex)
                psi_vals[mask] = self.psi.values(xi[mask] / scale, beta)
            else:
                psi_vals = self.psi.values(xi / scale, beta)
            weight = 2.0 ** (j * self.order_shift) * scale ** (-beta.order)
            total += weight * self.family.values(j, x, alpha) * psi_vals

        return total

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        return self.dyadic_sum(x, xi, alpha, beta, active_only=True)


def _check_annulus(psi: SmoothFunction) -> None:
    """Reject ψ unless it vanishes outside 1/2 < |ξ| < 2 (declared and sampled)."""
    if psi.support_radius is None or psi.support_radius > ANNULUS_OUTER + 1e-12:
        raise InvalidSymbolError(
            f"ψ={psi.name} must vanish for |ξ| >= 2 (support radius {psi.support_radius})",
            field="psi",
        )
    if psi.inner_radius < ANNULUS_INNER - 1e-12:
        raise InvalidSymbolError(
            f"ψ={psi.name} must vanish for |ξ| <= 1/2 (inner radius {psi.inner_radius})",
            field="psi",
        )

    radii = np.concatenate([np.linspace(0.0, ANNULUS_INNER, 33), np.linspace(2.0, 4.0, 33)])
    directions = np.eye(psi.dimension)
    points = (radii[:, np.newaxis, np.newaxis] * directions[np.newaxis]).reshape(-1, psi.dimension)
    if np.max(np.abs(psi.values(points, MultiIndex.zero(psi.dimension)))) > 0.0:
        raise InvalidSymbolError(f"ψ={psi.name} is nonzero outside the annulus", field="psi")


def make_elementary(
    m_family: DyadicFamily | SmoothFunction,
    psi: SmoothFunction,
    order_shift: float = 0.0,
    j_max: int = 2,
    name: str | None = None,
) -> ElementarySymbol:
    """
    Build an elementary symbol from a family m_j and an annulus bump ψ.

    Args:
        m_family: The family m_j, or a single function used for every j
        psi: Bump supported in 1/2 < |ξ| < 2
        order_shift: Weight exponent s'; the symbol has order s'
        j_max: Largest dyadic index

    Raises:
        InvalidSymbolError: If ψ does not vanish outside the annulus
    """
    family = m_family if isinstance(m_family, DyadicFamily) else DyadicFamily(m_family)
    return ElementarySymbol(family, psi, order_shift=order_shift, j_max=j_max, name=name)


def symbol_variables(dimension: int) -> tuple[list[str], dict[str, str]]:
    """Canonical variables x1..xd, xi1..xid and aliases x, xi for d = 1."""
    variables = [f"x{i + 1}" for i in range(dimension)] + [f"xi{i + 1}" for i in range(dimension)]
    aliases = {"x": "x1", "xi": "xi1"} if dimension == 1 else {}
    return variables, aliases


class ExpressionSymbol(Symbol):
    """σ(x, ξ) given by a sympy expression in x, xi (d = 1) or x1, x2, xi1, xi2."""

    def __init__(
        self,
        expression: str | sympy.Expr,
        dimension: int = 1,
        order: float = 0.0,
        name: str | None = None,
        x_support_radius: float | None = None,
        max_analytic_order: int | None = DEFAULT_MAX_ANALYTIC_ORDER,
        allow_finite_differences: bool = True,
    ):
        variables, aliases = symbol_variables(dimension)
        self._expr = CompiledExpression(expression, variables, aliases)
        super().__init__(
            dimension,
            order=order,
            name=name or str(self._expr),
            max_analytic_order=max_analytic_order,
            allow_finite_differences=allow_finite_differences,
            x_support_radius=x_support_radius,
        )

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        d = self.dimension
        coords = [x[..., i] for i in range(d)] + [xi[..., i] for i in range(d)]
        return self._expr.evaluate(coords, alpha.entries + beta.entries)


class CallableSymbol(Symbol):
    """
    A symbol from a plain vectorized callable σ(x, ξ).

    All derivatives come from nested central differences. For d = 1 the callable
    receives coordinate arrays without the trailing axis.
    """

    def __init__(
        self,
        func: Callable[[np.ndarray, np.ndarray], object],
        dimension: int = 1,
        order: float = 0.0,
        name: str = "callable",
        x_support_radius: float | None = None,
    ):
        super().__init__(
            dimension,
            order=order,
            name=name,
            deriv_mode=DerivativeMode.FINITE_DIFFERENCE,
            max_analytic_order=0,
            x_support_radius=x_support_radius,
        )
        self.func = func

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        if alpha.order + beta.order > 0:
            raise InvalidSymbolError("callable symbols provide values only", field=self.name)
        if self.dimension == 1:
            value = self.func(x[..., 0], xi[..., 0])
        else:
            value = self.func(x, xi)
        return as_complex(value, result_shape(x, xi))


class LinearCombinationSymbol(Symbol):
    """Σ_i c_i σ_i."""

    def __init__(self, terms: Sequence[tuple[complex, Symbol]], name: str | None = None):
        if not terms:
            raise InvalidSymbolError("a linear combination needs at least one term")
        dims = {sym.dimension for _, sym in terms}
        if len(dims) != 1:
            raise InvalidSymbolError("all terms must share the dimension")
        limits = [s.max_analytic_order for _, s in terms if s.max_analytic_order is not None]
        radii = [s.x_support_radius for _, s in terms]
        super().__init__(
            dims.pop(),
            order=max(sym.order for _, sym in terms),
            name=name or " + ".join(f"({c})*{s.name}" for c, s in terms),
            max_analytic_order=min(limits) if limits else None,
            allow_finite_differences=all(s.allow_finite_differences for _, s in terms),
            x_support_radius=None if any(r is None for r in radii) else max(radii),  # type: ignore[type-var]
        )
        self.terms = list(terms)

    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        total = np.zeros(result_shape(x, xi), dtype=complex)
        for coeff, sym in self.terms:
            total += coeff * sym.derivative(x, xi, alpha, beta)
        return total
