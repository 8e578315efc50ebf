"""
Tests for the symbol calculus: transpose expansions, truncation and order reduction.
"""

import numpy as np
import pytest

from psido_lab.calculus import (
    commutator_transpose_symbol,
    order_reduce,
    transpose_expansion,
    truncate,
)
from psido_lab.diagnostics import make_bump, translate_dilate, transpose_residuals
from psido_lab.discretization import Grid, apply, bilinear_pair
from psido_lab.errors import InvalidSymbolError, OrderExceededError
from psido_lab.symbols import (
    ConstantSymbol,
    DyadicFamily,
    ExpressionSymbol,
    SeparableSymbol,
    build_profile,
    make_elementary,
)
from psido_lab.symbols.functions import ConstantFunction

HALF_LENGTH = 16 * np.pi


@pytest.fixture
def grid():
    """The standard one-dimensional grid."""
    return Grid(1, 256, HALF_LENGTH)


class TestTransposeExpansion:
    """Tests for the truncated transpose expansion."""

    def test_first_term_reflects_frequency(self):
        """Test that N = 1 gives σ(x, -ξ)."""
        sym = ExpressionSymbol("x*xi + xi**3")
        star = transpose_expansion(sym, 1)
        assert complex(star.eval(2.0, 1.5)) == pytest.approx(complex(sym.eval(2.0, -1.5)))

    def test_second_term(self):
        """Test the correction term of x·exp(-ξ²), which differentiates σ(x, -ξ)."""
        sym = ExpressionSymbol("x*exp(-xi**2)")
        star = transpose_expansion(sym, 2)
        x, xi = 1.5, 0.7
        expected = x * np.exp(-(xi**2)) + 2j * xi * np.exp(-(xi**2))
        assert complex(star.eval(x, xi)) == pytest.approx(expected)

    def test_constant_symbol_is_self_transpose(self):
        """Test that σ ≡ 1 is unchanged."""
        star = transpose_expansion(ConstantSymbol(1.0), 3)
        assert complex(star.eval(0.3, -2.0)) == pytest.approx(1.0)

    def test_rejects_order_zero(self):
        """Test that N must be at least 1."""
        with pytest.raises(ValueError):
            transpose_expansion(ExpressionSymbol("x"), 0)

    def test_order_cap(self):
        """Test that an expansion needing derivatives beyond the cap raises without fallback."""
        sym = ExpressionSymbol("x*xi", max_analytic_order=2, allow_finite_differences=False)
        transpose_expansion(sym, 2)
        with pytest.raises(OrderExceededError):
            transpose_expansion(sym, 3)

    def test_commutator_side_matches_transpose(self):
        """Test that the commutator transpose symbol is the same expansion."""
        sym = ExpressionSymbol("x*exp(-xi**2)")
        a = complex(commutator_transpose_symbol(sym, 2).eval(0.4, 1.1))
        b = complex(transpose_expansion(sym, 2).eval(0.4, 1.1))
        assert a == b

    def test_exact_two_term_expansion_on_grid(self, grid):
        """Test that x·exp(-ξ²) has an exact two-term transpose on the safe block."""
        sym = ExpressionSymbol("x*exp(-xi**2)")
        first, second = transpose_residuals(sym, [1, 2], grid)
        assert second <= 1e-9
        assert first >= 10 * second
        assert first > 0.1

    def test_multiplier_transpose(self, grid):
        """Test that an even Fourier multiplier is its own transpose."""
        sym = SeparableSymbol(ConstantFunction(1.0, 1), build_profile("window", 1))
        (residual,) = transpose_residuals(sym, [1], grid)
        assert residual <= 1e-10

    def test_residuals_decrease_with_order(self, grid):
        """Test that residuals of x³·exp(-ξ²) do not grow with N."""
        sym = ExpressionSymbol("x**3*exp(-xi**2)")
        residuals = transpose_residuals(sym, [1, 2, 3, 4], grid)
        assert all(b <= a for a, b in zip(residuals, residuals[1:]))
        assert residuals[-1] <= 0.5 * residuals[0]

    def test_bilinear_duality_improves_with_order(self, grid):
        """Test that |⟨T_σ f, g⟩ - ⟨f, T_{σ*_N} g⟩| does not grow over N = 1..4."""
        family = DyadicFamily(build_profile("decay", 1, {"ell": 32.0}), weight_exponent=-0.5)
        sym = make_elementary(family, build_profile("annulus", 1), j_max=1)
        bump = make_bump(1, "standard")
        f = translate_dilate(bump, 3.0, 4.0, grid)
        g = translate_dilate(bump, 5.0, 4.0, grid)

        pairing = bilinear_pair(apply(sym, f), g)
        gaps = [
            abs(pairing - bilinear_pair(f, apply(transpose_expansion(sym, N), g)))
            for N in (1, 2, 3, 4)
        ]
        assert all(b <= a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] <= 0.5 * gaps[0]


class TestTruncation:
    """Tests for ε-truncation."""

    def test_unchanged_near_origin(self):
        """Test that σ_ε equals σ where u(εx, εξ) = 1."""
        sym = ExpressionSymbol("x*xi", order=1)
        cut = truncate(sym, 0.5)
        assert complex(cut.eval(0.5, 0.5)) == pytest.approx(0.25)

    def test_vanishes_far_away(self):
        """Test that σ_ε vanishes outside the scaled window."""
        cut = truncate(ExpressionSymbol("x*xi", order=1), 0.5)
        assert complex(cut.eval(3.0, 3.0)) == 0.0
        assert cut.x_support_radius == pytest.approx(4.0)
        assert cut.xi_support_radius == pytest.approx(4.0)

    @pytest.mark.parametrize("epsilon", [0.0, -0.1, 1.5])
    def test_rejects_bad_epsilon(self, epsilon):
        """Test that ε outside (0, 1] raises."""
        with pytest.raises(InvalidSymbolError):
            truncate(ExpressionSymbol("x"), epsilon)

    def test_rejects_window_not_one_at_origin(self):
        """Test that the window must equal 1 at the origin."""
        with pytest.raises(InvalidSymbolError):
            truncate(ExpressionSymbol("x"), 0.5, build_profile("annulus", 2))


class TestOrderReduction:
    """Tests for the order reduction σ = σ(x,0)ψ(ξ) + Σ ξ_j σ_j."""

    def test_linear_symbol_component(self):
        """Test that σ = ξ g(x) reduces to σ_1 = g."""
        sym = ExpressionSymbol("xi*exp(-x**2)", order=1)
        reduction = order_reduce(sym)
        x = np.linspace(-2.0, 2.0, 9)
        xi = np.linspace(-2.0, 2.0, 9)
        component = reduction.components[0]
        np.testing.assert_allclose(component.eval(x, xi), np.exp(-(x**2)), atol=1e-12)
        assert reduction.converged
        assert component.order == 0.0

    def test_reconstruction(self):
        """Test Σ ξ_j σ_j = σ - σ(x,0)ψ(ξ) on |ξ| <= 1."""
        sym = ExpressionSymbol("exp(-x**2)*sqrt(1 + xi**2)", order=1)
        reduction = order_reduce(sym)
        x, xi = np.meshgrid(np.linspace(-2.0, 2.0, 21), np.linspace(-1.0, 1.0, 21))
        assert reduction.reconstruction_error(x.ravel(), xi.ravel()) <= 1e-8

    def test_tilde_part(self):
        """Test that σ̃ = σ(x, 0)ψ(ξ)."""
        sym = ExpressionSymbol("exp(-x**2)*(1 + xi**2)", order=2)
        reduction = order_reduce(sym)
        assert complex(reduction.tilde_part.eval(1.0, 0.5)) == pytest.approx(np.exp(-1.0))
        assert complex(reduction.tilde_part.eval(1.0, 3.0)) == 0.0

    def test_two_dimensional_components(self):
        """Test one component per frequency coordinate."""
        sym = ExpressionSymbol("xi1*exp(-x1**2) + xi2*exp(-x2**2)", dimension=2, order=1)
        reduction = order_reduce(sym)
        assert len(reduction.components) == 2
        x = np.array([[0.5, -1.0]])
        xi = np.array([[0.3, 0.4]])
        assert complex(reduction.components[1].eval(x, xi)[0]) == pytest.approx(np.exp(-1.0))

    def test_rejects_few_nodes(self):
        """Test the minimum number of quadrature nodes."""
        with pytest.raises(ValueError):
            order_reduce(ExpressionSymbol("xi"), quadrature_nodes=8)

    def test_rejects_window_not_one_at_origin(self):
        """Test that ψ(0) must equal 1."""
        with pytest.raises(InvalidSymbolError):
            order_reduce(ExpressionSymbol("xi"), psi=build_profile("annulus", 1))
