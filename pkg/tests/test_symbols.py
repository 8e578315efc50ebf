"""
Tests for symbols and smooth building blocks.
"""

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from psido_lab.errors import InvalidSymbolError, OrderExceededError, UnknownProfileError
from psido_lab.schema.schema import MultiIndex
from psido_lab.symbols import (
    CallableSymbol,
    ConstantFunction,
    ConstantSymbol,
    ExpressionFunction,
    ExpressionSymbol,
    LinearCombinationSymbol,
    SeparableSymbol,
    build_profile,
    make_elementary,
    make_separable,
)


class TestMultiIndex:
    """Tests for MultiIndex."""

    def test_enumerate_graded_order(self):
        """Test the graded lexicographic enumeration in two dimensions."""
        indices = [m.entries for m in MultiIndex.enumerate(2, 2)]
        assert indices == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]

    def test_negative_entries_rejected(self):
        """Test that negative entries fail validation."""
        with pytest.raises(ValueError):
            MultiIndex(entries=(1, -1))

    def test_arithmetic_and_factorial(self):
        """Test addition, order and factorial."""
        alpha = MultiIndex.of(2, 1) + MultiIndex.unit(2, 1)
        assert alpha.entries == (2, 2)
        assert alpha.order == 4
        assert alpha.factorial == 4


class TestProfiles:
    """Tests for the built-in radial profiles."""

    def test_window_plateau_and_support(self):
        """Test that the window is 1 on the unit ball and 0 beyond radius 2."""
        window = build_profile("window", 1)
        values = window(np.array([0.0, 0.5, 1.0, 2.0, 3.0]))
        np.testing.assert_allclose(values, [1.0, 1.0, 1.0, 0.0, 0.0], atol=1e-15)
        assert window.support_radius == pytest.approx(2.0)

    def test_annulus_vanishes_off_the_annulus(self):
        """Test that the annulus bump is zero near the origin and outside radius 2."""
        psi = build_profile("annulus", 2)
        points = np.array([[0.0, 0.0], [0.3, 0.2], [2.0, 0.0], [0.0, 3.5]])
        assert np.all(psi(points) == 0.0)
        assert abs(psi(np.array([[1.0, 0.0]]))[0]) > 0.0

    def test_gaussian_derivative(self):
        """Test the chain-rule derivative of a radial profile."""
        g = build_profile("gaussian", 1)
        x = np.linspace(-2.0, 2.0, 9)
        np.testing.assert_allclose(g(x, 1), -2.0 * x * np.exp(-(x**2)), atol=1e-14)

    def test_unknown_profile(self):
        """Test that an unregistered profile name raises."""
        with pytest.raises(UnknownProfileError):
            build_profile("boxcar", 1)

    def test_plateau_parameters_checked(self):
        """Test that inner >= outer is rejected."""
        with pytest.raises(InvalidSymbolError):
            build_profile("plateau", 1, {"inner": 2.0, "outer": 1.0})


class TestSymbolFamilies:
    """Tests for the symbol families."""

    def test_constant_symbol(self):
        """Test values and vanishing derivatives of a constant symbol."""
        sym = ConstantSymbol(2.5)
        assert sym.eval(1.0, -3.0) == pytest.approx(2.5)
        assert sym.eval(1.0, -3.0, alpha=1) == 0.0

    def test_make_separable(self):
        """Test m ≡ 1 with a window: σ(x, 0) = 1 and σ vanishes for |ξ| >= 2."""
        sym = make_separable(ConstantFunction(1.0, 1), build_profile("window", 1), order=-1.0)
        assert complex(sym.eval(7.0, 0.0)) == pytest.approx(1.0)
        assert complex(sym.eval(7.0, 2.5)) == 0.0
        assert sym.order == -1.0

    def test_expression_symbol_derivatives(self):
        """Test analytic derivatives of x·exp(-ξ²)."""
        sym = ExpressionSymbol("x*exp(-xi**2)")
        assert sym.eval(2.0, 0.5, beta=1) == pytest.approx(2.0 * -1.0 * np.exp(-0.25))
        assert sym.eval(2.0, 0.5, alpha=1) == pytest.approx(np.exp(-0.25))
        assert sym.eval(2.0, 0.5, alpha=2) == 0.0

    def test_expression_symbol_two_dimensions(self):
        """Test evaluation on (..., 2) point arrays."""
        sym = ExpressionSymbol("x1*xi2", dimension=2)
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        xi = np.array([[5.0, 6.0], [7.0, 8.0]])
        np.testing.assert_allclose(sym(x, xi), [6.0, 24.0])
        np.testing.assert_allclose(sym.eval(x, xi, alpha=(1, 0), beta=(0, 1)), [1.0, 1.0])

    def test_separable_symbol_factors(self):
        """Test that a separable symbol is m(x)ψ(ξ) with factored derivatives."""
        m = ExpressionFunction("exp(-x**2)", 1)
        psi = build_profile("window", 1)
        sym = SeparableSymbol(m, psi)
        assert sym.eval(0.5, 0.3) == pytest.approx(np.exp(-0.25))
        assert sym.eval(0.5, 0.3, alpha=1) == pytest.approx(-1.0 * np.exp(-0.25))
        assert sym.xi_support_radius == pytest.approx(2.0)

    def test_callable_symbol_finite_differences(self):
        """Test that callable symbols differentiate with central differences."""
        sym = CallableSymbol(lambda x, xi: np.sin(x) * np.exp(-(xi**2)))
        value = sym.eval(0.3, 0.2, alpha=1)
        assert value == pytest.approx(np.cos(0.3) * np.exp(-0.04), abs=1e-6)

    def test_order_cap_without_fallback(self):
        """Test that derivatives above the cap raise when finite differences are off."""
        sym = ExpressionSymbol("x*exp(-xi**2)", max_analytic_order=2, allow_finite_differences=False)
        sym.eval(0.0, 0.0, alpha=1, beta=1)
        with pytest.raises(OrderExceededError):
            sym.eval(0.0, 0.0, alpha=1, beta=2)

    def test_order_cap_with_fallback(self):
        """Test that derivatives above the cap fall back to finite differences."""
        sym = ExpressionSymbol("sin(x)*xi", max_analytic_order=0)
        assert sym.eval(0.4, 1.0, alpha=1, beta=1) == pytest.approx(np.cos(0.4), abs=1e-5)

    def test_linear_combination(self):
        """Test that a linear combination sums its terms."""
        a = ExpressionSymbol("x")
        b = ExpressionSymbol("xi**2", order=2)
        combo = LinearCombinationSymbol([(2.0, a), (-1.0, b)])
        assert combo.order == 2.0
        assert combo.eval(1.5, 2.0) == pytest.approx(3.0 - 4.0)

    @settings(max_examples=25, deadline=None)
    @given(
        x=st.floats(min_value=-3.0, max_value=3.0),
        xi=st.floats(min_value=-3.0, max_value=3.0),
    )
    def test_mixed_partials_commute(self, x, xi):
        """Test that ∂_x∂_ξ of a callable symbol matches the analytic mixed partial."""
        exact = ExpressionSymbol("sin(x)*exp(-xi**2/4)")
        numeric = CallableSymbol(lambda p, q: np.sin(p) * np.exp(-(q**2) / 4))
        assert numeric.eval(x, xi, alpha=1, beta=1) == pytest.approx(
            complex(exact.eval(x, xi, alpha=1, beta=1)), abs=1e-5
        )

    @settings(max_examples=25, deadline=None)
    @given(
        x=st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0)),
        xi=st.tuples(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0)),
    )
    def test_analytic_mixed_partials_in_any_order(self, x, xi):
        """Test that (α, β) derivatives match differentiating ξ first, then x."""
        text = "sin(x1*xi2)*exp(-xi1**2/4)*cos(x2 + xi1)"
        sym = ExpressionSymbol(text, dimension=2)
        x1, x2, xi1, xi2 = sympy.symbols("x1 x2 xi1 xi2", real=True)
        expr = sympy.sympify(text, locals={"x1": x1, "x2": x2, "xi1": xi1, "xi2": xi2})
        reordered = sympy.diff(expr, xi2, xi1, x2, x1)
        expected = complex(reordered.subs({x1: x[0], x2: x[1], xi1: xi[0], xi2: xi[1]}).evalf(30))
        value = complex(sym.eval(np.array(x), np.array(xi), alpha=(1, 1), beta=(1, 1)))
        assert value == pytest.approx(expected, rel=1e-12, abs=1e-13)


class TestElementarySymbol:
    """Tests for elementary (dyadic) symbols."""

    @pytest.fixture
    def elementary(self):
        """Elementary symbol with decaying m and the annulus bump."""
        return make_elementary(
            build_profile("decay", 1), build_profile("annulus", 1), order_shift=-1.0, j_max=3
        )

    def test_active_only_matches_full_sum(self, elementary):
        """Test that skipping inactive dyadic indices does not change the sum."""
        x = np.linspace(-3.0, 3.0, 401)[:, np.newaxis]
        xi = np.linspace(-20.0, 20.0, 401)[:, np.newaxis]
        for beta in (MultiIndex.of(0), MultiIndex.of(2)):
            alpha = MultiIndex.of(1)
            active = elementary.dyadic_sum(x, xi, alpha, beta, active_only=True)
            full = elementary.dyadic_sum(x, xi, alpha, beta, active_only=False)
            np.testing.assert_allclose(active, full, rtol=0, atol=1e-14)

    def test_vanishes_at_zero_frequency(self, elementary):
        """Test that σ(x, 0) = 0 because ψ vanishes near the origin."""
        x = np.linspace(-5.0, 5.0, 11)
        assert np.all(elementary.eval(x, np.zeros_like(x)) == 0.0)

    def test_declared_order(self, elementary):
        """Test that the declared order equals the weight exponent."""
        assert elementary.order == -1.0
        assert elementary.xi_support_radius == pytest.approx(16.0)

    def test_rejects_non_annulus_psi(self):
        """Test that ψ must vanish near the origin."""
        with pytest.raises(InvalidSymbolError):
            make_elementary(ConstantFunction(1.0, 1), build_profile("window", 1))

    def test_rejects_small_j_max(self):
        """Test that J_max below 1 is rejected."""
        with pytest.raises(InvalidSymbolError):
            make_elementary(ConstantFunction(1.0, 1), build_profile("annulus", 1), j_max=0)
