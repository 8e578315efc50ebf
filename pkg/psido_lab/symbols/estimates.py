"""
Symbol-class diagnostics.

Shell estimates of the weighted derivative bounds, the Cordes expression
(Id - Δ_x)^N (Id - Δ_ξ)^N σ, finite-difference checks of analytic derivatives,
and Peetre's inequality margin.
"""

import logging
from collections.abc import Sequence
from math import comb, factorial

import numpy as np
from scipy.stats import qmc

from psido_lab.parallel import ordered_map
from psido_lab.schema.schema import ClassEstimate, MultiIndex
from psido_lab.symbols.base import IndexLike, Symbol, as_multi_index, as_points
from psido_lab.symbols.finite_differences import central_difference

logger = logging.getLogger(__name__)

MIN_SAMPLES_PER_SHELL = 16


def _unit_directions(u: np.ndarray, dimension: int) -> np.ndarray:
    """Map uniform samples in [0, 1) to unit vectors (signs for d = 1, angles for d = 2)."""
    if dimension == 1:
        return np.where(u < 0.5, -1.0, 1.0)[:, np.newaxis]
    angle = 2.0 * np.pi * u
    return np.stack([np.cos(angle), np.sin(angle)], axis=-1)


def shell_samples(
    lo: float, hi: float, count: int, dimension: int, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """
    Quasi-random points (x, ξ) with lo <= |x| + |ξ| < hi.

    A scrambled Halton sequence in four coordinates gives the radius r, the split
    |x| = λ r, |ξ| = (1 - λ) r, and the two directions.

    Returns:
        Arrays x, ξ of shape (count, d)
    """
    u = qmc.Halton(d=4, scramble=True, seed=seed).random(count)
    r = lo + u[:, 0] * (hi - lo)
    lam = u[:, 1]
    x = (lam * r)[:, np.newaxis] * _unit_directions(u[:, 2], dimension)
    xi = ((1.0 - lam) * r)[:, np.newaxis] * _unit_directions(u[:, 3], dimension)
    return x, xi


def class_shell_estimate(
    sym: Symbol,
    alpha: IndexLike,
    beta: IndexLike,
    s: float | None = None,
    shells: Sequence[float] = (1.0, 4.0, 16.0, 64.0, 256.0),
    samples_per_shell: int = 1024,
    seed: int = 0,
    jobs: int = 1,
) -> ClassEstimate:
    """
    Sample sup |∂_x^α ∂_ξ^β σ| (1 + |ξ|)^{|β| - s} over shells of |x| + |ξ|.

    Shell i is [ρ_i, ρ_{i+1}); the last shell is [ρ_K, 2ρ_K). Each shell uses its
    own scrambled Halton stream seeded with seed + i.

    Args:
        sym: Symbol under test
        alpha: x-derivative multi-index
        beta: ξ-derivative multi-index
        s: Order in the weight (default: the symbol's declared order)
        shells: Increasing positive radii
        samples_per_shell: Samples per shell (>= 16)
        seed: Base seed
        jobs: Worker threads (shells run in parallel)

    Returns:
        ClassEstimate with one supremum per shell
    """
    if samples_per_shell < MIN_SAMPLES_PER_SHELL:
        raise ValueError(f"samples_per_shell must be >= {MIN_SAMPLES_PER_SHELL}")
    radii = [float(r) for r in shells]
    if not radii or radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError(f"shells must be positive and increasing, got {radii}")

    d = sym.dimension
    a = as_multi_index(alpha, d)
    b = as_multi_index(beta, d)
    order = sym.order if s is None else float(s)
    bounds = [(radii[i], radii[i + 1] if i + 1 < len(radii) else 2.0 * radii[i]) for i in range(len(radii))]

    def shell_sup(i: int) -> float:
        lo, hi = bounds[i]
        x, xi = shell_samples(lo, hi, samples_per_shell, d, seed + i)
        weight = (1.0 + np.linalg.norm(xi, axis=-1)) ** (b.order - order)
        return float(np.max(np.abs(sym.derivative(x, xi, a, b)) * weight))

    sups = ordered_map(shell_sup, range(len(bounds)), jobs)
    logger.debug(f"{sym.name}: shell sups for alpha={a}, beta={b}: {sups}")
    return ClassEstimate(
        alpha=a,
        beta=b,
        order=order,
        shell_radii=radii,
        shell_sups=sups,
        sample_counts=[samples_per_shell] * len(radii),
        seed=seed,
    )


def laplacian_power_terms(dimension: int, power: int) -> list[tuple[float, MultiIndex]]:
    """
    Expand (Id - Δ)^N = Σ_{|γ| <= N} C(N, |γ|) (-1)^{|γ|} |γ|!/γ! ∂^{2γ}.

    Returns:
        (coefficient, 2γ) pairs
    """
    terms = []
    for gamma in MultiIndex.enumerate(dimension, power):
        k = gamma.order
        coeff = comb(power, k) * (-1.0) ** k * factorial(k) / gamma.factorial
        terms.append((coeff, gamma + gamma))
    return terms


def cordes_stat(sym: Symbol, N: int, x: object, xi: object) -> np.ndarray:
    """
    Evaluate (Id - Δ_x)^N (Id - Δ_ξ)^N σ(x, ξ) through mixed partials.

    Requires derivatives up to total order 4N.

    Raises:
        OrderExceededError: If the symbol cannot supply the derivatives
    """
    if N < 0:
        raise ValueError(f"N must be non-negative, got {N}")
    d = sym.dimension
    return cordes_values(sym, N, as_points(x, d), as_points(xi, d))


def cordes_values(sym: Symbol, N: int, x_pts: np.ndarray, xi_pts: np.ndarray) -> np.ndarray:
    """`cordes_stat` on normalized point arrays (..., d)."""
    terms = laplacian_power_terms(sym.dimension, N)
    total: np.ndarray | complex = 0.0
    for cx, ax in terms:
        for cxi, bxi in terms:
            total = total + cx * cxi * sym.derivative(x_pts, xi_pts, ax, bxi)
    return np.asarray(total, dtype=complex)


def fd_check(
    sym: Symbol, x: object, xi: object, alpha: IndexLike, beta: IndexLike, h: float
) -> float:
    """
    Compare analytic derivatives with the nested central stencil.

    The x-step is h and the ξ-step is h (1 + |ξ|).

    Returns:
        max |analytic - finite difference| over the given points
    """
    if h <= 0:
        raise ValueError(f"step must be positive, got {h}")
    d = sym.dimension
    x_pts, xi_pts = as_points(x, d), as_points(xi, d)
    a, b = as_multi_index(alpha, d), as_multi_index(beta, d)
    zero = MultiIndex.zero(d)

    analytic = sym.derivative(x_pts, xi_pts, a, b)
    h_xi = h * (1.0 + np.linalg.norm(xi_pts, axis=-1))
    approx = central_difference(
        lambda p, q: sym.derivative(p, q, zero, zero), x_pts, xi_pts, a, b, h, h_xi
    )
    return float(np.max(np.abs(analytic - approx)))


def peetre_margin(
    z: object, xi: object, s: float | np.ndarray, k: float | np.ndarray, dimension: int = 1
) -> np.ndarray:
    """
    RHS - LHS of (1+|z|)^{s-k} <= (1+|ξ|)^{s-k} (1+|z-ξ|)^{|s|+k}.

    Raises:
        ValueError: If k is negative
    """
    k_arr = np.asarray(k, dtype=float)
    if np.any(k_arr < 0):
        raise ValueError("k must be non-negative")
    s_arr = np.asarray(s, dtype=float)
    z_pts, xi_pts = as_points(z, dimension), as_points(xi, dimension)
    z_norm = np.linalg.norm(z_pts, axis=-1)
    xi_norm = np.linalg.norm(xi_pts, axis=-1)
    gap = np.linalg.norm(z_pts - xi_pts, axis=-1)
    lhs = (1.0 + z_norm) ** (s_arr - k_arr)
    rhs = (1.0 + xi_norm) ** (s_arr - k_arr) * (1.0 + gap) ** (np.abs(s_arr) + k_arr)
    return rhs - lhs


def min_peetre_margin(
    count: int,
    seed: int,
    dimension: int = 1,
    radius: float = 10.0,
    k_max: float = 10.0,
    s_max: float = 5.0,
) -> float:
    """
    Smallest relative Peetre margin over seeded Halton samples.

    z, ξ are drawn in [-radius, radius]^d, k in [0, k_max], s in [-s_max, s_max].
    Each margin is divided by max(1, RHS) so rounding on large values stays comparable.
    """
    u = qmc.Halton(d=2 * dimension + 2, scramble=True, seed=seed).random(count)
    z = radius * (2.0 * u[:, :dimension] - 1.0)
    xi = radius * (2.0 * u[:, dimension : 2 * dimension] - 1.0)
    k = k_max * u[:, 2 * dimension]
    s = s_max * (2.0 * u[:, 2 * dimension + 1] - 1.0)
    if dimension == 1:
        z, xi = z[:, 0], xi[:, 0]
    margin = peetre_margin(z, xi, s, k, dimension)
    rhs = margin + (1.0 + np.linalg.norm(as_points(z, dimension), axis=-1)) ** (s - k)
    return float(np.min(margin / np.maximum(1.0, rhs)))
