"""
Tests for grids, grid functions and dense operator matrices.
"""

import numpy as np
import pytest

from psido_lab.discretization import (
    MATRIX_HEADER,
    Grid,
    GridFunction,
    OperatorMatrix,
    apply,
    assemble,
    bilinear_pair,
    commutator_matrix,
    commutator_matrix_direct,
    forward_transform,
    multiplication_matrix,
)
from psido_lab.errors import GridMismatchError, SizeCapExceededError
from psido_lab.symbols import ConstantSymbol, ExpressionFunction, ExpressionSymbol

HALF_LENGTH = 16 * np.pi


@pytest.fixture
def grid():
    """The standard one-dimensional grid."""
    return Grid(1, 256, HALF_LENGTH)


@pytest.fixture
def small_grid():
    """A coarse grid for dense comparisons."""
    return Grid(1, 64, 8 * np.pi)


class TestGrid:
    """Tests for Grid."""

    def test_points_and_frequencies(self, grid):
        """Test the point and frequency conventions."""
        assert grid.points[0, 0] == pytest.approx(-HALF_LENGTH)
        assert grid.spacing == pytest.approx(2 * HALF_LENGTH / 256)
        assert grid.frequency_indices[0, 0] == -128
        assert grid.frequencies[129, 0] == pytest.approx(np.pi / HALF_LENGTH)
        assert grid.nyquist == pytest.approx(8.0)

    def test_two_dimensional_layout(self):
        """Test that points are flattened with the first coordinate slowest."""
        g = Grid(2, 4, 1.0)
        assert g.size == 16
        assert g.points.shape == (16, 2)
        np.testing.assert_allclose(g.points[1], [-1.0, -0.5])

    @pytest.mark.parametrize("n", [7, 0])
    def test_rejects_odd_or_tiny_n(self, n):
        """Test that n must be even and at least 2."""
        with pytest.raises(ValueError):
            Grid(1, n, 1.0)

    def test_safe_mask(self, grid):
        """Test that the default safe block is max |x_a| <= L/2."""
        mask = grid.safe_mask()
        assert np.all(np.abs(grid.points[mask, 0]) <= HALF_LENGTH / 2 + 1e-9)
        assert mask.sum() == 129

    def test_equality(self):
        """Test that grids compare by (d, n, L)."""
        assert Grid(1, 8, 2.0) == Grid(1, 8, 2.0)
        assert Grid(1, 8, 2.0) != Grid(1, 8, 3.0)


class TestGridFunction:
    """Tests for GridFunction."""

    def test_wrong_length_rejected(self, grid):
        """Test that the sample count must equal n^d."""
        with pytest.raises(GridMismatchError):
            GridFunction(grid, np.zeros(10))

    def test_non_finite_rejected(self, small_grid):
        """Test that NaN samples are rejected."""
        values = np.zeros(small_grid.size)
        values[3] = np.nan
        with pytest.raises(ValueError):
            GridFunction(small_grid, values)

    def test_mixing_grids_rejected(self, grid, small_grid):
        """Test that arithmetic across grids raises."""
        with pytest.raises(GridMismatchError):
            GridFunction.constant(grid) + GridFunction.constant(small_grid)

    def test_bilinear_pair_has_no_conjugation(self, small_grid):
        """Test ⟨f, g⟩ = h Σ f g for f = g = i."""
        f = GridFunction.constant(small_grid, 1j)
        assert bilinear_pair(f, f) == pytest.approx(-2 * small_grid.half_length)

    def test_forward_transform_of_exponential(self, small_grid):
        """Test that e^{i ξ_k x} has a single unit coefficient at k."""
        index = 35
        xi = small_grid.frequencies[index, 0]
        f = GridFunction(small_grid, np.exp(1j * xi * small_grid.points[:, 0]))
        coeffs = forward_transform(f)
        expected = np.zeros(small_grid.size, dtype=complex)
        expected[index] = 1.0
        np.testing.assert_allclose(coeffs, expected, atol=1e-12)


class TestApplyAndAssemble:
    """Tests for applying and assembling T_σ."""

    def test_identity(self, grid):
        """Test that σ ≡ 1 assembles to the identity and applies as one."""
        op = assemble(ConstantSymbol(1.0), grid)
        np.testing.assert_allclose(op.entries, np.eye(grid.size), atol=1e-12)
        f = GridFunction(grid, np.exp(-(grid.points[:, 0] ** 2)))
        np.testing.assert_allclose(apply(ConstantSymbol(1.0), f).values, f.values, atol=1e-12)

    def test_fourier_multiplier_on_exponential(self, small_grid):
        """Test T e^{iξ_k x} = m(ξ_k) e^{iξ_k x} for a multiplier m."""
        index = 30
        xi = small_grid.frequencies[index, 0]
        f = GridFunction(small_grid, np.exp(1j * xi * small_grid.points[:, 0]))
        out = apply(ExpressionSymbol("exp(-xi**2)"), f)
        np.testing.assert_allclose(out.values, np.exp(-(xi**2)) * f.values, atol=1e-12)

    def test_matrix_matches_apply(self, small_grid):
        """Test that the assembled matrix reproduces `apply`."""
        sym = ExpressionSymbol("x*exp(-xi**2) + sin(x)*xi/(1 + xi**2)")
        f = GridFunction(small_grid, np.exp(-((small_grid.points[:, 0] - 1.0) ** 2)))
        direct = apply(sym, f)
        via_matrix = assemble(sym, small_grid).apply(f)
        scale = direct.max_abs()
        np.testing.assert_allclose(via_matrix.values, direct.values, atol=1e-11 * scale)

    def test_parallel_blocks_agree(self):
        """Test that the thread count does not change the matrix."""
        grid = Grid(1, 1024, HALF_LENGTH)
        sym = ExpressionSymbol("exp(-x**2)*xi/(1 + xi**2)")
        serial = assemble(sym, grid, jobs=1)
        threaded = assemble(sym, grid, jobs=4)
        np.testing.assert_array_equal(serial.entries, threaded.entries)

    def test_two_dimensional_identity(self):
        """Test the identity on a 2-D grid."""
        g = Grid(2, 8, np.pi)
        op = assemble(ConstantSymbol(1.0, dimension=2), g)
        np.testing.assert_allclose(op.entries, np.eye(64), atol=1e-12)

    def test_size_cap(self, small_grid):
        """Test that grids above the cap are refused."""
        with pytest.raises(SizeCapExceededError):
            assemble(ConstantSymbol(1.0), small_grid, size_cap=16)

    def test_dimension_mismatch(self, small_grid):
        """Test that a 2-D symbol cannot act on a 1-D grid."""
        with pytest.raises(GridMismatchError):
            apply(ConstantSymbol(1.0, dimension=2), GridFunction.constant(small_grid))


class TestCommutator:
    """Tests for commutators with multiplication operators."""

    def test_two_paths_agree(self, small_grid):
        """Test matrix and column-by-column commutators against each other."""
        sym = ExpressionSymbol("x*exp(-xi**2)")
        a = ExpressionFunction("tanh(x)", 1)
        via_matrix = commutator_matrix(sym, a, small_grid)
        direct = commutator_matrix_direct(sym, a, small_grid)
        scale = max(via_matrix.norm(), 1.0)
        assert (via_matrix - direct).norm() <= 1e-10 * scale

    def test_constant_multiplier_commutes(self, small_grid):
        """Test that [T, c] = 0 for a constant multiplier."""
        sym = ExpressionSymbol("x*exp(-xi**2)")
        assert commutator_matrix(sym, 3.0, small_grid).norm() <= 1e-12

    def test_multiplication_matrix(self, small_grid):
        """Test that M_a is diagonal with the sampled multiplier."""
        op = multiplication_matrix(lambda x: x**2, small_grid)
        np.testing.assert_allclose(np.diag(op.entries), small_grid.points[:, 0] ** 2)
        assert np.count_nonzero(op.entries - np.diag(np.diag(op.entries))) == 0


class TestOperatorMatrix:
    """Tests for OperatorMatrix algebra and file format."""

    def test_algebra(self, small_grid):
        """Test transpose, sums, products and scaling."""
        rng = np.random.default_rng(0)
        a = OperatorMatrix(small_grid, rng.normal(size=(64, 64)), "A")
        b = OperatorMatrix(small_grid, rng.normal(size=(64, 64)), "B")
        np.testing.assert_array_equal(a.transpose().entries, a.entries.T)
        np.testing.assert_allclose((a + b).entries, a.entries + b.entries)
        np.testing.assert_allclose((a @ b).entries, a.entries @ b.entries)
        np.testing.assert_allclose(a.scaled(2.0).entries, 2.0 * a.entries)

    def test_norm_invariant_under_unitary(self, small_grid):
        """Test that the spectral norm is unchanged by a unitary factor."""
        rng = np.random.default_rng(1)
        a = OperatorMatrix(small_grid, rng.normal(size=(64, 64)))
        q, _ = np.linalg.qr(rng.normal(size=(64, 64)) + 1j * rng.normal(size=(64, 64)))
        rotated = OperatorMatrix(small_grid, q) @ a
        assert rotated.norm() == pytest.approx(a.norm(), rel=1e-12)

    def test_export_and_load(self, small_grid, tmp_path):
        """Test the binary matrix file layout and reading it back."""
        op = assemble(ExpressionSymbol("x*exp(-xi**2)"), small_grid)
        path = op.export(tmp_path / "op.bin")
        assert path.stat().st_size == MATRIX_HEADER.itemsize + 16 * small_grid.size**2
        loaded = OperatorMatrix.load(path)
        assert loaded.grid == small_grid
        np.testing.assert_array_equal(loaded.entries, op.entries)

    def test_load_rejects_foreign_file(self, tmp_path):
        """Test that a file without the magic is rejected."""
        path = tmp_path / "junk.bin"
        path.write_bytes(b"\x00" * 64)
        with pytest.raises(ValueError):
            OperatorMatrix.load(path)
