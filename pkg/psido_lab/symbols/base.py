"""
Base class for symbols.

A symbol σ(x, ξ) on R^d × R^d exposes its partial derivatives ∂_x^α ∂_ξ^β σ
through a single vectorized entry point, together with its declared order and
how derivatives are obtained.
"""

import logging
from abc import ABC, abstractmethod
from collections.abc import Sequence

import numpy as np

from psido_lab.errors import OrderExceededError
from psido_lab.schema.schema import DerivativeMode, MultiIndex
from psido_lab.symbols.finite_differences import central_difference, default_steps

logger = logging.getLogger(__name__)

DEFAULT_MAX_ANALYTIC_ORDER = 16

IndexLike = MultiIndex | Sequence[int] | int | None


def as_points(value: object, dimension: int) -> np.ndarray:
    """
    Convert raw coordinates to an array with a trailing axis of length d.

    For d = 1 every entry is a coordinate, so a trailing axis is always appended.
    For d >= 2 the last axis must already have length d.
    """
    arr = np.asarray(value, dtype=float)
    if dimension == 1:
        return arr[..., np.newaxis]
    if arr.ndim == 0 or arr.shape[-1] != dimension:
        raise ValueError(f"points must end with an axis of length {dimension}, got {arr.shape}")
    return arr


def as_multi_index(value: IndexLike, dimension: int) -> MultiIndex:
    """Accept a MultiIndex, a sequence of ints, an int (d = 1) or None (zero index)."""
    if value is None:
        return MultiIndex.zero(dimension)
    if isinstance(value, MultiIndex):
        index = value
    elif isinstance(value, (int, np.integer)):
        index = MultiIndex.of(int(value))
    else:
        index = MultiIndex(entries=tuple(int(v) for v in value))
    if index.dimension != dimension:
        raise ValueError(f"multi-index {index} has {index.dimension} entries, expected {dimension}")
    return index


def result_shape(x: np.ndarray, xi: np.ndarray) -> tuple[int, ...]:
    """Broadcast shape of two point arrays without the coordinate axis."""
    return np.broadcast_shapes(x.shape[:-1], xi.shape[:-1])


def as_complex(values: object, shape: tuple[int, ...]) -> np.ndarray:
    """Broadcast values to shape as a writable complex array."""
    return np.array(np.broadcast_to(np.asarray(values, dtype=complex), shape))


class Symbol(ABC):
    """
    Abstract base class for symbols σ(x, ξ).

    Subclasses implement `_analytic`; the base class handles input normalization,
    the analytic order cap and the finite-difference fallback.
    """

    def __init__(
        self,
        dimension: int,
        order: float,
        name: str,
        deriv_mode: DerivativeMode = DerivativeMode.ANALYTIC,
        max_analytic_order: int | None = DEFAULT_MAX_ANALYTIC_ORDER,
        allow_finite_differences: bool = True,
        x_support_radius: float | None = None,
        xi_support_radius: float | None = None,
    ):
        """
        Initialize common symbol metadata.

        Args:
            dimension: Dimension d of x and ξ
            order: Declared order s
            name: Label used in logs and reports
            deriv_mode: Analytic or finite-difference derivatives
            max_analytic_order: Largest |α| + |β| served analytically (None for unlimited)
            allow_finite_differences: Whether to fall back above the cap
            x_support_radius: σ vanishes for |x| >= this radius, if known
            xi_support_radius: σ vanishes for |ξ| >= this radius, if known
        """
        if dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {dimension}")
        self.dimension = dimension
        self.order = float(order)
        self.name = name
        self.deriv_mode = deriv_mode
        self.max_analytic_order = max_analytic_order
        self.allow_finite_differences = allow_finite_differences
        self.x_support_radius = x_support_radius
        self.xi_support_radius = xi_support_radius

    @abstractmethod
    def _analytic(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        """
        Evaluate ∂_x^α ∂_ξ^β σ on normalized point arrays.

        Args:
            x: Array (..., d)
            xi: Array (..., d), broadcastable against x

        Returns:
            Complex array of the broadcast shape
        """

    def derivative(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        """
        Evaluate ∂_x^α ∂_ξ^β σ on normalized point arrays, honoring the order cap.

        Raises:
            OrderExceededError: If the order exceeds the cap and finite differences are off
        """
        if self.deriv_mode is DerivativeMode.FINITE_DIFFERENCE:
            return self._finite_difference(x, xi, alpha, beta)

        total = alpha.order + beta.order
        limit = self.max_analytic_order
        if limit is not None and total > limit:
            if not self.allow_finite_differences:
                raise OrderExceededError(total, limit, self.name)
            logger.debug(f"{self.name}: order {total} above {limit}, using finite differences")
            return self._finite_difference(x, xi, alpha, beta)

        return self._analytic(x, xi, alpha, beta)

    def _finite_difference(
        self, x: np.ndarray, xi: np.ndarray, alpha: MultiIndex, beta: MultiIndex
    ) -> np.ndarray:
        zero = MultiIndex.zero(self.dimension)
        h_x, h_xi = default_steps(xi, alpha.order + beta.order)
        return central_difference(
            lambda a, b: self._analytic(a, b, zero, zero), x, xi, alpha, beta, h_x, h_xi
        )

    def eval(
        self, x: object, xi: object, alpha: IndexLike = None, beta: IndexLike = None
    ) -> np.ndarray:
        """
        Evaluate ∂_x^α ∂_ξ^β σ(x, ξ) at raw coordinates.

        Args:
            x: Spatial point(s); plain numbers for d = 1, trailing axis d otherwise
            xi: Frequency point(s), broadcastable against x
            alpha: x-derivative multi-index (default 0)
            beta: ξ-derivative multi-index (default 0)

        Returns:
            Complex array of the broadcast point shape (0-d for single points)
        """
        d = self.dimension
        return self.derivative(
            as_points(x, d), as_points(xi, d), as_multi_index(alpha, d), as_multi_index(beta, d)
        )

    def __call__(self, x: object, xi: object) -> np.ndarray:
        return self.eval(x, xi)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(name={self.name!r}, d={self.dimension}, order={self.order:g})"
