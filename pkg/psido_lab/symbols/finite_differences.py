"""
Nested central finite differences.

The k-th derivative in one coordinate is the k-fold composition of the central
difference D_h f = (f(x+h) - f(x-h)) / 2h, i.e. the stencil
(2h)^{-k} Σ_i C(k,i) (-1)^i f(x + (k-2i)h), tensorized over coordinates.
Every stencil is second-order accurate.
"""

from collections.abc import Callable
from itertools import product
from math import comb

import numpy as np

from psido_lab.schema.schema import MultiIndex

DEFAULT_X_STEP = 1e-4
DEFAULT_XI_STEP = 1e-4

_EPS = float(np.finfo(float).eps)


def default_steps(xi: np.ndarray, order: int) -> tuple[float, np.ndarray]:
    """
    Default steps h_x = 1e-4 and h_ξ = 1e-4 (1 + |ξ|).

    For total orders above two the steps grow to eps^{1/(k+2)} so that rounding
    does not swamp the stencil.

    Args:
        xi: Frequency points (..., d)
        order: Total derivative order k

    Returns:
        (h_x, h_xi) with h_xi broadcastable to xi.shape[:-1]
    """
    factor = max(1.0, _EPS ** (1.0 / (order + 2)) / DEFAULT_X_STEP)
    h_x = DEFAULT_X_STEP * factor
    h_xi = DEFAULT_XI_STEP * factor * (1.0 + np.linalg.norm(xi, axis=-1))
    return h_x, h_xi


def _stencil(order: int) -> list[tuple[float, int]]:
    """(weight, shift in units of h) pairs for one coordinate."""
    return [(comb(order, i) * (-1.0) ** i, order - 2 * i) for i in range(order + 1)]


def central_difference(
    func: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x: np.ndarray,
    xi: np.ndarray,
    alpha: MultiIndex,
    beta: MultiIndex,
    h_x: float | np.ndarray,
    h_xi: float | np.ndarray,
) -> np.ndarray:
    """
    Approximate ∂_x^α ∂_ξ^β func(x, ξ) with the nested central stencil.

    Args:
        func: Vectorized function of (x, ξ) point arrays
        x: Points (..., d)
        xi: Points (..., d)
        alpha: x-derivative multi-index
        beta: ξ-derivative multi-index
        h_x: Step in x (scalar or per point)
        h_xi: Step in ξ (scalar or per point)

    Returns:
        Complex array of the broadcast point shape
    """
    x, xi = np.broadcast_arrays(x, xi)
    shape = x.shape[:-1]
    h_x = np.broadcast_to(np.asarray(h_x, dtype=float), shape)
    h_xi = np.broadcast_to(np.asarray(h_xi, dtype=float), shape)

    axes = [_stencil(a) for a in alpha.entries] + [_stencil(b) for b in beta.entries]
    d = x.shape[-1]
    total = np.zeros(shape, dtype=complex)

    for terms in product(*axes):
        weight = 1.0
        shifts = []
        for w, s in terms:
            weight *= w
            shifts.append(s)
        x_shift = np.asarray(shifts[:d], dtype=float)
        xi_shift = np.asarray(shifts[d:], dtype=float)
        xs = x + x_shift * h_x[..., np.newaxis] if x_shift.any() else x
        xis = xi + xi_shift * h_xi[..., np.newaxis] if xi_shift.any() else xi
        total += weight * np.asarray(func(xs, xis), dtype=complex)

    return total / ((2.0 * h_x) ** alpha.order * (2.0 * h_xi) ** beta.order)
