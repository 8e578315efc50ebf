"""
Tests for symbol-class estimates.
"""

import numpy as np
import pytest

from psido_lab.diagnostics import trend_passes
from psido_lab.symbols import (
    ConstantFunction,
    ExpressionFunction,
    ExpressionSymbol,
    SeparableSymbol,
    build_profile,
    class_shell_estimate,
    cordes_stat,
    fd_check,
    min_peetre_margin,
    peetre_margin,
)
from psido_lab.symbols.estimates import shell_samples


class TestShellEstimates:
    """Tests for shell sampling and class estimates."""

    def test_samples_lie_in_shell(self):
        """Test that |x| + |ξ| falls inside [lo, hi)."""
        x, xi = shell_samples(4.0, 16.0, 512, 2, seed=3)
        total = np.linalg.norm(x, axis=-1) + np.linalg.norm(xi, axis=-1)
        assert x.shape == (512, 2)
        assert np.all(total >= 4.0 - 1e-12)
        assert np.all(total < 16.0)

    def test_samples_are_seeded(self):
        """Test that the same seed reproduces the samples."""
        first = shell_samples(1.0, 2.0, 64, 1, seed=7)
        second = shell_samples(1.0, 2.0, 64, 1, seed=7)
        np.testing.assert_array_equal(first[0], second[0])
        np.testing.assert_array_equal(first[1], second[1])

    def test_vanishing_symbol_shell_sups_decrease(self):
        """Test that a decaying separable symbol has non-increasing shell suprema."""
        sym = SeparableSymbol(build_profile("decay", 1), build_profile("window", 1))
        estimate = class_shell_estimate(
            sym, 0, 0, shells=[1.0, 4.0, 16.0, 64.0], samples_per_shell=256, seed=0
        )
        sups = estimate.shell_sups
        assert len(sups) == 4
        assert all(b <= a for a, b in zip(sups, sups[1:]))
        assert trend_passes(sups)
        assert estimate.shell_bounds()[-1] == (64.0, 128.0)

    def test_constant_symbol_does_not_decay(self):
        """Test that σ ≡ 1 keeps shell suprema equal to 1."""
        sym = SeparableSymbol(ConstantFunction(1.0, 1), ConstantFunction(1.0, 1))
        estimate = class_shell_estimate(sym, 0, 0, shells=[1.0, 4.0, 16.0], samples_per_shell=64)
        np.testing.assert_allclose(estimate.shell_sups, [1.0, 1.0, 1.0])
        assert not trend_passes(estimate.shell_sups)

    def test_rejects_bad_shells(self):
        """Test that non-increasing radii raise."""
        sym = ExpressionSymbol("x")
        with pytest.raises(ValueError):
            class_shell_estimate(sym, 0, 0, shells=[4.0, 1.0], samples_per_shell=32)

    def test_rejects_too_few_samples(self):
        """Test the minimum sample count per shell."""
        sym = ExpressionSymbol("x")
        with pytest.raises(ValueError):
            class_shell_estimate(sym, 0, 0, samples_per_shell=8)


class TestCordes:
    """Tests for the Cordes expression."""

    def test_gaussian_times_window_at_origin(self):
        """Test (1 - Δ_x)(1 - Δ_ξ) of exp(-x²)ψ(ξ) at the origin."""
        sym = SeparableSymbol(ExpressionFunction("exp(-x**2)", 1), build_profile("window", 1))
        assert complex(cordes_stat(sym, 1, 0.0, 0.0)) == pytest.approx(3.0)

    def test_order_zero_is_the_symbol(self):
        """Test that N = 0 returns σ itself."""
        sym = ExpressionSymbol("exp(-x**2 - xi**2)")
        assert complex(cordes_stat(sym, 0, 0.5, 0.5)) == pytest.approx(np.exp(-0.5))

    def test_negative_order_rejected(self):
        """Test that a negative N raises."""
        with pytest.raises(ValueError):
            cordes_stat(ExpressionSymbol("x"), -1, 0.0, 0.0)


class TestFiniteDifferenceCheck:
    """Tests for the analytic vs finite-difference check."""

    @pytest.fixture
    def points(self):
        """Sample points away from the origin."""
        x = np.linspace(0.3, 1.7, 8)
        xi = np.linspace(0.5, 2.5, 8)
        return x, xi

    def test_zero_order_is_exact(self, points):
        """Test that α = β = 0 gives a zero residual."""
        sym = ExpressionSymbol("sin(x)*exp(-xi**2)")
        assert fd_check(sym, *points, 0, 0, 1e-3) == 0.0

    def test_step_halving_is_second_order(self, points):
        """Test that halving the step divides the residual by about four."""
        sym = ExpressionSymbol("sin(x)*exp(-xi**2)")
        coarse = fd_check(sym, *points, 1, 1, 1e-2)
        fine = fd_check(sym, *points, 1, 1, 5e-3)
        assert coarse > 0.0
        assert fine / coarse <= 0.3

    def test_truncated_product_rule(self, points):
        """Test analytic derivatives of a truncated symbol against the stencil."""
        from psido_lab.calculus import truncate

        sym = truncate(ExpressionSymbol("x*xi", order=1), 0.5)
        assert fd_check(sym, *points, 1, 1, 1e-4) <= 1e-3

    def test_rejects_non_positive_step(self, points):
        """Test that h <= 0 raises."""
        with pytest.raises(ValueError):
            fd_check(ExpressionSymbol("x"), *points, 1, 0, 0.0)


class TestPeetre:
    """Tests for Peetre's inequality margin."""

    def test_known_margin(self):
        """Test the margin at z = 1, ξ = 3, s = -1, k = 1."""
        margin = peetre_margin(1.0, 3.0, -1.0, 1.0)
        assert float(margin) == pytest.approx(0.3125)

    def test_negative_k_rejected(self):
        """Test that k < 0 raises."""
        with pytest.raises(ValueError):
            peetre_margin(0.0, 0.0, 1.0, -1.0)

    @pytest.mark.parametrize("dimension", [1, 2])
    def test_inequality_holds_on_samples(self, dimension):
        """Test that the smallest relative margin is non-negative up to rounding."""
        assert min_peetre_margin(10_000, seed=0, dimension=dimension) >= -1e-12
