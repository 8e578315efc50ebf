"""
Smooth functions on R^d with derivative access.

These are the building blocks of symbols: x-factors m(x), frequency windows ψ(ξ),
multipliers a(x) and bump profiles. Built-in radial profiles c(|x|²) carry exact
chain-rule derivatives and are extended by constants outside their smooth interval.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from itertools import product

import numpy as np
import sympy

from psido_lab.errors import InvalidSymbolError, UnknownProfileError
from psido_lab.schema.schema import MultiIndex
from psido_lab.symbols.base import IndexLike, as_complex, as_multi_index, as_points
from psido_lab.symbols.expressions import CompiledExpression

logger = logging.getLogger(__name__)

# Fraction of the smooth interval treated as the constant extension near each end.
# Flat profiles are below e^{-1000} there, far under double precision.
EDGE_MARGIN = 1e-4


class SmoothFunction(ABC):
    """
    Abstract base class for smooth scalar functions on R^d.

    `values` works on normalized point arrays (..., d); calling the function
    accepts raw coordinates.
    """

    def __init__(
        self,
        dimension: int,
        name: str,
        support_radius: float | None = None,
        inner_radius: float = 0.0,
    ):
        """
        Args:
            dimension: Dimension d
            name: Label for logs and reports
            support_radius: Function vanishes for |x| >= support_radius (None if unknown)
            inner_radius: Function vanishes for |x| <= inner_radius
        """
        self.dimension = dimension
        self.name = name
        self.support_radius = support_radius
        self.inner_radius = inner_radius

    @abstractmethod
    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        """Evaluate ∂^α f on points of shape (..., d); returns a complex array (...)."""

    def __call__(self, x: object, alpha: IndexLike = None) -> np.ndarray:
        d = self.dimension
        return self.values(as_points(x, d), as_multi_index(alpha, d))

    @property
    def is_compactly_supported(self) -> bool:
        return self.support_radius is not None

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, d={self.dimension})"


class ConstantFunction(SmoothFunction):
    """f ≡ value."""

    def __init__(self, value: complex, dimension: int):
        super().__init__(dimension, name=f"constant({value})")
        self.value = value

    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        shape = points.shape[:-1]
        if alpha.order > 0:
            return np.zeros(shape, dtype=complex)
        return np.full(shape, self.value, dtype=complex)


def expression_variables(dimension: int) -> tuple[list[str], dict[str, str]]:
    """Canonical variables x1..xd and accepted aliases for function expressions."""
    variables = [f"x{i + 1}" for i in range(dimension)]
    aliases = {f"xi{i + 1}": f"x{i + 1}" for i in range(dimension)}
    if dimension == 1:
        aliases.update({"x": "x1", "xi": "x1", "t": "x1"})
    return variables, aliases


class ExpressionFunction(SmoothFunction):
    """A function given by a sympy expression in x (d = 1) or x1, ..., xd."""

    def __init__(
        self,
        expression: str | sympy.Expr,
        dimension: int,
        name: str | None = None,
        support_radius: float | None = None,
    ):
        variables, aliases = expression_variables(dimension)
        self._expr = CompiledExpression(expression, variables, aliases)
        super().__init__(dimension, name or str(self._expr), support_radius=support_radius)

    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        coords = [points[..., i] for i in range(self.dimension)]
        return self._expr.evaluate(coords, alpha.entries)


class RadialProfile(SmoothFunction):
    """
    f(x) = c(|x / scale|²) for a one-variable profile c(y).

    On the open interval (lo, hi) the profile is evaluated from its sympy
    expression; for y <= lo it equals `outside[0]` and for y >= hi it equals
    `outside[1]`. Either end may be None (no constant extension on that side).

    Derivatives use ∂^β c(|x|²) = Σ_{k <= β/2} Π_i β_i! / (k_i! (β_i - 2k_i)!)
    (2x_i)^{β_i - 2k_i} c^{(|β| - |k|)}(|x|²).
    """

    def __init__(
        self,
        profile: str | sympy.Expr,
        dimension: int,
        name: str,
        interval: tuple[float | None, float | None] = (None, None),
        outside: tuple[float, float] = (0.0, 0.0),
        scale: float = 1.0,
    ):
        """
        Args:
            profile: Expression in the variable y = |x|²
            dimension: Dimension d
            name: Profile label
            interval: Open interval (lo, hi) in y where the expression is used
            outside: Constant values below lo and above hi
            scale: Argument scaling; support and inner radii scale with it
        """
        if scale <= 0:
            raise InvalidSymbolError(f"scale must be positive, got {scale}", field="scale")
        self._profile = CompiledExpression(profile, ["y"])
        self.interval = interval
        self.outside = outside
        self.scale = scale

        lo, hi = interval
        if lo is not None and hi is not None:
            self._margin = EDGE_MARGIN * (hi - lo)
        else:
            bound = hi if hi is not None else lo
            self._margin = EDGE_MARGIN * max(abs(bound), 1.0) if bound is not None else 0.0

        support = math.sqrt(hi) * scale if hi is not None and outside[1] == 0.0 else None
        inner = math.sqrt(lo) * scale if lo is not None and lo > 0 and outside[0] == 0.0 else 0.0
        super().__init__(dimension, name, support_radius=support, inner_radius=inner)

    def profile_derivative(self, y: np.ndarray, order: int) -> np.ndarray:
        """c^{(order)}(y) with the constant extension outside the smooth interval."""
        lo, hi = self.interval
        out = np.zeros(y.shape, dtype=complex)
        interior = np.ones(y.shape, dtype=bool)
        if lo is not None:
            below = y <= lo + self._margin
            interior &= ~below
            if order == 0:
                out[below] = self.outside[0]
        if hi is not None:
            above = y >= hi - self._margin
            interior &= ~above
            if order == 0:
                out[above] = self.outside[1]
        if interior.any():
            out[interior] = self._profile.evaluate([y[interior]], (order,))
        return out

    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        x = points / self.scale
        y = np.sum(x * x, axis=-1)
        total = np.zeros(y.shape, dtype=complex)
        derivatives: dict[int, np.ndarray] = {}

        for k in product(*(range(b // 2 + 1) for b in alpha.entries)):
            coeff: np.ndarray | float = 1.0
            for i, (b, ki) in enumerate(zip(alpha.entries, k)):
                weight = math.factorial(b) / (math.factorial(ki) * math.factorial(b - 2 * ki))
                coeff = coeff * weight * (2.0 * x[..., i]) ** (b - 2 * ki)
            order = alpha.order - sum(k)
            if order not in derivatives:
                derivatives[order] = self.profile_derivative(y, order)
            total += coeff * derivatives[order]

        return total / self.scale**alpha.order


class ProductFunction(SmoothFunction):
    """f · g with Leibniz-rule derivatives."""

    def __init__(self, first: SmoothFunction, second: SmoothFunction):
        if first.dimension != second.dimension:
            raise InvalidSymbolError("factors must share the dimension", field="times")
        radii = [r for r in (first.support_radius, second.support_radius) if r is not None]
        super().__init__(
            first.dimension,
            name=f"{first.name}*{second.name}",
            support_radius=min(radii) if radii else None,
            inner_radius=max(first.inner_radius, second.inner_radius),
        )
        self.first = first
        self.second = second

    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        total = np.zeros(points.shape[:-1], dtype=complex)
        for gamma in product(*(range(a + 1) for a in alpha.entries)):
            g = MultiIndex(entries=gamma)
            weight = math.prod(math.comb(a, c) for a, c in zip(alpha.entries, gamma))
            total += weight * self.first.values(points, g) * self.second.values(points, alpha - g)
        return total


class PartialDerivativeFunction(SmoothFunction):
    """∂_j f for a fixed coordinate j."""

    def __init__(self, base: SmoothFunction, axis: int):
        if not 0 <= axis < base.dimension:
            raise ValueError(f"axis {axis} outside 0..{base.dimension - 1}")
        super().__init__(
            base.dimension,
            name=f"d{axis + 1}({base.name})",
            support_radius=base.support_radius,
            inner_radius=base.inner_radius,
        )
        self.base = base
        self.axis = axis

    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        return self.base.values(points, alpha + MultiIndex.unit(self.dimension, self.axis))


class CallableFunction(SmoothFunction):
    """Wraps a plain vectorized callable; only the value (α = 0) is available."""

    def __init__(self, func: Callable[[np.ndarray], object], dimension: int, name: str = "callable"):
        super().__init__(dimension, name)
        self.func = func

    def values(self, points: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        if alpha.order > 0:
            raise InvalidSymbolError("callable functions provide values only", field=self.name)
        arg = points[..., 0] if self.dimension == 1 else points
        return as_complex(self.func(arg), points.shape[:-1])


# ---------------------------------------------------------------------------
# Built-in profiles
# ---------------------------------------------------------------------------

_Y = sympy.Symbol("y", real=True)


def _smooth_step(t: sympy.Expr) -> sympy.Expr:
    """S(t) = f(t) / (f(t) + f(1 - t)) with f(t) = exp(-1/t); 0 at t = 0, 1 at t = 1."""
    return sympy.exp(-1 / t) / (sympy.exp(-1 / t) + sympy.exp(-1 / (1 - t)))


def _standard(dimension: int, params: dict[str, float]) -> SmoothFunction:
    return RadialProfile(
        sympy.exp(-1 / (1 - _Y)),
        dimension,
        name="standard",
        interval=(None, 1.0),
        outside=(0.0, 0.0),
        scale=params.get("scale", 1.0),
    )


def _plateau(dimension: int, params: dict[str, float]) -> SmoothFunction:
    inner = params.get("inner", 1.0)
    outer = params.get("outer", 2.0)
    if not 0 < inner < outer:
        raise InvalidSymbolError(f"need 0 < inner < outer, got {inner}, {outer}", field="plateau")
    t = (outer**2 - _Y) / (outer**2 - inner**2)
    return RadialProfile(
        _smooth_step(t),
        dimension,
        name=f"plateau({inner:g},{outer:g})",
        interval=(inner**2, outer**2),
        outside=(1.0, 0.0),
        scale=params.get("scale", 1.0),
    )


def _window(dimension: int, params: dict[str, float]) -> SmoothFunction:
    return _plateau(dimension, {"inner": 1.0, "outer": 2.0, **params})


def _annulus(dimension: int, params: dict[str, float]) -> SmoothFunction:
    # τ maps (1/4, 4) in y = |ξ|² onto (-1, 1)
    tau = (_Y - sympy.Rational(17, 8)) / sympy.Rational(15, 8)
    return RadialProfile(
        sympy.exp(-1 / (1 - tau**2)),
        dimension,
        name="annulus",
        interval=(0.25, 4.0),
        outside=(0.0, 0.0),
        scale=params.get("scale", 1.0),
    )


def _decay(dimension: int, params: dict[str, float]) -> SmoothFunction:
    ell = params.get("ell", 1.0)
    return RadialProfile(1 / (1 + _Y / ell**2), dimension, name=f"decay({ell:g})")


def _gaussian(dimension: int, params: dict[str, float]) -> SmoothFunction:
    width = params.get("width", 1.0)
    return RadialProfile(sympy.exp(-_Y / width**2), dimension, name=f"gaussian({width:g})")


def _constant(dimension: int, params: dict[str, float]) -> SmoothFunction:
    return ConstantFunction(params.get("value", 1.0), dimension)


PROFILES: dict[str, Callable[[int, dict[str, float]], SmoothFunction]] = {
    "standard": _standard,
    "plateau": _plateau,
    "window": _window,
    "annulus": _annulus,
    "decay": _decay,
    "gaussian": _gaussian,
    "constant": _constant,
}


def build_profile(
    name: str, dimension: int, params: dict[str, float] | None = None
) -> SmoothFunction:
    """
    Build a built-in profile.

    Args:
        name: One of PROFILES
        dimension: Dimension d
        params: Profile parameters (inner, outer, ell, width, scale, value)

    Returns:
        The profile as a SmoothFunction

    Raises:
        UnknownProfileError: If the name is not registered
    """
    factory = PROFILES.get(name)
    if factory is None:
        raise UnknownProfileError(name, list(PROFILES))
    return factory(dimension, dict(params or {}))
