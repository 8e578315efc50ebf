"""
Torus discretization of pseudodifferential operators.

Grid points x_m = -L + m h (h = 2L/n) and frequencies ξ_k = (π/L) k with
k = -n/2 … n/2-1 in centered order, flattened in C order for d = 2. The forward
transform carries n^{-d}, so that

    T_σ f(x_m) = Σ_k σ(x_m, ξ_k) f̂(k) e^{i x_m·ξ_k}

reproduces f exactly for σ ≡ 1. Since x_m ξ_k = -πk + 2π m k / n, the phase
e^{i x_m ξ_k} is (-1)^k times an n-th root of unity.
"""

import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np
from scipy.fft import fftn, fftshift, ifftshift
from scipy.linalg import svdvals

from psido_lab.errors import GridMismatchError, ReportWriteError, SizeCapExceededError
from psido_lab.parallel import ordered_map
from psido_lab.schema.schema import GridSpec, MultiIndex
from psido_lab.symbols.base import Symbol
from psido_lab.symbols.functions import SmoothFunction

logger = logging.getLogger(__name__)

DEFAULT_SIZE_CAP = 4096
ROW_BLOCK = 256

MATRIX_MAGIC = b"PSIDOMAT"
MATRIX_FORMAT_VERSION = 1
MATRIX_HEADER = np.dtype(
    [
        ("magic", "S8"),
        ("version", "<u4"),
        ("dimension", "<u4"),
        ("points_per_dim", "<u4"),
        ("reserved", "<u4"),
        ("half_length", "<f8"),
    ]
)


class Grid:
    """
    Uniform grid on the torus [-L, L)^d.

    Attributes:
        dimension: d (1 or 2)
        n: Points per dimension (even)
        half_length: L
        spacing: h = 2L / n
        points: Sample points, shape (n^d, d)
        frequencies: ξ_k, shape (n^d, d), centered order
        point_indices: m, shape (n^d, d)
        frequency_indices: k, shape (n^d, d)
    """

    def __init__(self, dimension: int, n: int, half_length: float):
        if dimension not in (1, 2):
            raise ValueError(f"dimension must be 1 or 2, got {dimension}")
        if n < 2 or n % 2:
            raise ValueError(f"points per dimension must be even and >= 2, got {n}")
        if half_length <= 0:
            raise ValueError(f"half length must be positive, got {half_length}")

        self.dimension = dimension
        self.n = n
        self.half_length = float(half_length)
        self.spacing = 2.0 * self.half_length / n

        m = np.arange(n)
        k = np.arange(-n // 2, n // 2)
        self.point_indices = self._mesh(m)
        self.frequency_indices = self._mesh(k)
        self.points = -self.half_length + self.spacing * self.point_indices
        self.frequencies = (np.pi / self.half_length) * self.frequency_indices
        self._roots = np.exp(2j * np.pi * m / n)

    def _mesh(self, axis: np.ndarray) -> np.ndarray:
        mesh = np.meshgrid(*([axis] * self.dimension), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1)

    @classmethod
    def from_spec(cls, spec: GridSpec) -> "Grid":
        return cls(spec.dimension, spec.points_per_dim, spec.half_length)

    @property
    def size(self) -> int:
        """Number of samples n^d."""
        return self.n**self.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dimension

    @property
    def nyquist(self) -> float:
        """|ξ| of the Nyquist index k = -n/2."""
        return np.pi * self.n / (2.0 * self.half_length)

    def phases(self, rows: np.ndarray) -> np.ndarray:
        """e^{i x_m·ξ_k} for the given point rows against every frequency, shape (len(rows), n^d)."""
        m = self.point_indices[rows]
        out = np.ones((len(m), self.size), dtype=complex)
        for a in range(self.dimension):
            k = self.frequency_indices[:, a]
            sign = np.where(k % 2 == 0, 1.0, -1.0)
            out *= sign * self._roots[np.outer(m[:, a], k) % self.n]
        return out

    def safe_mask(self, radius: float | None = None) -> np.ndarray:
        """Points with max_a |x_a| <= radius (default L/2)."""
        limit = self.half_length / 2.0 if radius is None else radius
        return np.max(np.abs(self.points), axis=-1) <= limit + 1e-12 * self.half_length

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (self.dimension, self.n, self.half_length) == (
            other.dimension,
            other.n,
            other.half_length,
        )

    def __hash__(self) -> int:
        return hash((self.dimension, self.n, self.half_length))

    def __repr__(self) -> str:
        return f"Grid(d={self.dimension}, n={self.n}, L={self.half_length:g})"


class GridFunction:
    """Complex samples of a function on a grid, in flattened point order."""

    def __init__(self, grid: Grid, values: object):
        arr = np.asarray(values, dtype=complex).reshape(-1)
        if arr.shape != (grid.size,):
            raise GridMismatchError(f"{grid.size} samples", f"{arr.size} samples")
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid function values must be finite")
        self.grid = grid
        self.values = arr

    @classmethod
    def constant(cls, grid: Grid, value: complex = 1.0) -> "GridFunction":
        return cls(grid, np.full(grid.size, value, dtype=complex))

    @classmethod
    def from_function(cls, grid: Grid, func: "SmoothFunction | Callable[[np.ndarray], object] | complex") -> "GridFunction":
        return cls(grid, sample_function(func, grid))

    def _check(self, other: "GridFunction") -> None:
        if other.grid != self.grid:
            raise GridMismatchError(repr(self.grid), repr(other.grid))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, other: "GridFunction | complex") -> "GridFunction":
        if isinstance(other, GridFunction):
            self._check(other)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(self.grid, self.values * other)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        """Discrete L² norm h^{d/2} ‖values‖₂."""
        return float(self.grid.spacing ** (self.grid.dimension / 2) * np.linalg.norm(self.values))

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def reshaped(self) -> np.ndarray:
        """Values as an array of shape (n,) * d."""
        return self.values.reshape(self.grid.shape)


def sample_function(
    func: SmoothFunction | Callable[[np.ndarray], object] | complex, grid: Grid
) -> np.ndarray:
    """
    Sample a multiplier on the grid.

    Accepts a SmoothFunction, a vectorized callable (coordinate array for d = 1,
    points (N, d) otherwise) or a constant.
    """
    if isinstance(func, SmoothFunction):
        return func.values(grid.points, MultiIndex.zero(grid.dimension))
    if callable(func):
        arg = grid.points[:, 0] if grid.dimension == 1 else grid.points
        return np.array(np.broadcast_to(np.asarray(func(arg), dtype=complex), (grid.size,)))
    return np.full(grid.size, complex(func), dtype=complex)


class OperatorMatrix:
    """Dense n^d × n^d matrix acting on flattened grid samples."""

    def __init__(self, grid: Grid, entries: np.ndarray, label: str = "operator"):
        arr = np.asarray(entries, dtype=complex)
        if arr.shape != (grid.size, grid.size):
            raise GridMismatchError(f"{grid.size}x{grid.size} matrix", f"shape {arr.shape}")
        self.grid = grid
        self.entries = arr
        self.label = label

    def apply(self, f: GridFunction) -> GridFunction:
        if f.grid != self.grid:
            raise GridMismatchError(repr(self.grid), repr(f.grid))
        return GridFunction(self.grid, self.entries @ f.values)

    def transpose(self) -> "OperatorMatrix":
        """Plain (bilinear) transpose, no conjugation."""
        return OperatorMatrix(self.grid, self.entries.T.copy(), f"{self.label}^T")

    def _check(self, other: "OperatorMatrix") -> None:
        if other.grid != self.grid:
            raise GridMismatchError(repr(self.grid), repr(other.grid))

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.grid, self.entries + other.entries, f"{self.label}+{other.label}")

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.grid, self.entries - other.entries, f"{self.label}-{other.label}")

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        self._check(other)
        return OperatorMatrix(self.grid, self.entries @ other.entries, f"{self.label}@{other.label}")

    def scaled(self, factor: complex) -> "OperatorMatrix":
        return OperatorMatrix(self.grid, factor * self.entries, f"{factor}*{self.label}")

    def norm(self) -> float:
        """Spectral norm (largest singular value)."""
        if self.entries.size == 0:
            return 0.0
        return float(svdvals(self.entries)[0])

    def export(self, path: str | Path) -> Path:
        """
        Write the matrix as a binary file.

        Layout: a 32-byte header (magic PSIDOMAT, format version, d, n, reserved,
        L as float64), then row-major little-endian complex128 entries.

        Raises:
            ReportWriteError: If the file cannot be written
        """
        target = Path(path)
        header = np.zeros(1, dtype=MATRIX_HEADER)
        header["magic"] = MATRIX_MAGIC
        header["version"] = MATRIX_FORMAT_VERSION
        header["dimension"] = self.grid.dimension
        header["points_per_dim"] = self.grid.n
        header["half_length"] = self.grid.half_length
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "wb") as f:
                f.write(header.tobytes())
                f.write(np.ascontiguousarray(self.entries, dtype="<c16").tobytes())
        except OSError as e:
            raise ReportWriteError(str(target), str(e)) from e
        logger.debug(f"Exported {self.label} to {target}")
        return target

    @classmethod
    def load(cls, path: str | Path, label: str | None = None) -> "OperatorMatrix":
        """Read a matrix written by `export`."""
        target = Path(path)
        header = np.fromfile(target, dtype=MATRIX_HEADER, count=1)
        if header.size != 1 or header["magic"][0] != MATRIX_MAGIC:
            raise ValueError(f"{target} is not a psido matrix file")
        if int(header["version"][0]) != MATRIX_FORMAT_VERSION:
            raise ValueError(f"unsupported matrix format version {int(header['version'][0])}")
        grid = Grid(
            int(header["dimension"][0]),
            int(header["points_per_dim"][0]),
            float(header["half_length"][0]),
        )
        entries = np.fromfile(target, dtype="<c16", offset=MATRIX_HEADER.itemsize)
        if entries.size != grid.size**2:
            raise ValueError(f"{target}: expected {grid.size**2} entries, found {entries.size}")
        return cls(grid, entries.reshape(grid.size, grid.size), label or target.stem)


def forward_transform(f: GridFunction) -> np.ndarray:
    """f̂(k) = n^{-d} Σ_m f(x_m) e^{-i x_m·ξ_k}, flattened in centered frequency order."""
    grid = f.grid
    axes = tuple(range(grid.dimension))
    coeffs = fftshift(fftn(f.reshaped(), axes=axes, norm="forward"), axes=axes).reshape(-1)
    signs = np.where(grid.frequency_indices.sum(axis=-1) % 2 == 0, 1.0, -1.0)
    return coeffs * signs


def _symbol_rows(sym: Symbol, grid: Grid, rows: np.ndarray) -> np.ndarray:
    """σ(x_m, ξ_k) e^{i x_m·ξ_k} for the given rows, shape (len(rows), n^d)."""
    zero = MultiIndex.zero(grid.dimension)
    x = grid.points[rows][:, np.newaxis, :]
    xi = grid.frequencies[np.newaxis, :, :]
    return sym.derivative(x, xi, zero, zero) * grid.phases(rows)


def _row_blocks(size: int) -> list[np.ndarray]:
    return [np.arange(start, min(start + ROW_BLOCK, size)) for start in range(0, size, ROW_BLOCK)]


def _check_grid(sym: Symbol, grid: Grid) -> None:
    if sym.dimension != grid.dimension:
        raise GridMismatchError(f"symbol of dimension {grid.dimension}", f"dimension {sym.dimension}")
    if sym.xi_support_radius is not None and sym.xi_support_radius > grid.nyquist:
        logger.warning(
            f"{sym.name}: ξ-support radius {sym.xi_support_radius:g} exceeds the Nyquist "
            f"frequency {grid.nyquist:g} of {grid!r}"
        )


def apply(sym: Symbol, f: GridFunction, jobs: int = 1) -> GridFunction:
    """
    Apply T_σ to a grid function.

    out(x_m) = Σ_k σ(x_m, ξ_k) f̂(k) e^{i x_m·ξ_k}, evaluated in blocks of output rows.

    Raises:
        GridMismatchError: If σ and the grid disagree on the dimension
    """
    grid = f.grid
    _check_grid(sym, grid)
    coeffs = forward_transform(f)
    blocks = _row_blocks(grid.size)
    parts = ordered_map(lambda rows: _symbol_rows(sym, grid, rows) @ coeffs, blocks, jobs)
    return GridFunction(grid, np.concatenate(parts))


def apply_columns(sym: Symbol, grid: Grid, columns: np.ndarray, jobs: int = 1) -> np.ndarray:
    """Apply T_σ to every column of an (n^d, B) array of samples."""
    _check_grid(sym, grid)
    coeffs = np.stack(
        [forward_transform(GridFunction(grid, columns[:, j])) for j in range(columns.shape[1])],
        axis=-1,
    )
    blocks = _row_blocks(grid.size)
    parts = ordered_map(lambda rows: _symbol_rows(sym, grid, rows) @ coeffs, blocks, jobs)
    return np.concatenate(parts, axis=0)


def assemble(
    sym: Symbol, grid: Grid, size_cap: int = DEFAULT_SIZE_CAP, jobs: int = 1
) -> OperatorMatrix:
    """
    Dense matrix of T_σ on the grid; column j equals apply(σ, e_j).

    Row m is n^{-d} Σ_k σ(x_m, ξ_k) e^{i x_m·ξ_k} e^{-i x_j·ξ_k}, computed for a
    block of rows at once with an FFT over k.

    Raises:
        SizeCapExceededError: If n^d exceeds the cap
    """
    if grid.size > size_cap:
        raise SizeCapExceededError(grid.size, size_cap)
    _check_grid(sym, grid)

    axes = tuple(range(1, grid.dimension + 1))
    signs = np.where(grid.frequency_indices.sum(axis=-1) % 2 == 0, 1.0, -1.0)

    def block(rows: np.ndarray) -> np.ndarray:
        weighted = (_symbol_rows(sym, grid, rows) * signs).reshape((len(rows), *grid.shape))
        natural = ifftshift(weighted, axes=axes)
        return fftn(natural, axes=axes, norm="forward").reshape(len(rows), grid.size)

    parts = ordered_map(block, _row_blocks(grid.size), jobs)
    logger.debug(f"Assembled {sym.name} on {grid!r}")
    return OperatorMatrix(grid, np.concatenate(parts, axis=0), sym.name)


def multiplication_matrix(
    a: SmoothFunction | Callable[[np.ndarray], object] | complex, grid: Grid
) -> OperatorMatrix:
    """diag(a(x_m))."""
    values = sample_function(a, grid)
    label = getattr(a, "name", "a")
    return OperatorMatrix(grid, np.diag(values), f"M[{label}]")


def commutator_matrix(
    sym: Symbol,
    a: SmoothFunction | Callable[[np.ndarray], object] | complex,
    grid: Grid,
    size_cap: int = DEFAULT_SIZE_CAP,
    jobs: int = 1,
) -> OperatorMatrix:
    """[T_σ, M_a] = M(T_σ) A - A M(T_σ) with A = diag(a(x_m))."""
    return commutator_of(assemble(sym, grid, size_cap, jobs), a)


def commutator_of(
    op: OperatorMatrix, a: SmoothFunction | Callable[[np.ndarray], object] | complex
) -> OperatorMatrix:
    """Commutator of an assembled operator with diag(a(x_m))."""
    values = sample_function(a, op.grid)
    entries = op.entries * values[np.newaxis, :] - values[:, np.newaxis] * op.entries
    return OperatorMatrix(op.grid, entries, f"[{op.label},M]")


def commutator_matrix_direct(
    sym: Symbol,
    a: SmoothFunction | Callable[[np.ndarray], object] | complex,
    grid: Grid,
    size_cap: int = DEFAULT_SIZE_CAP,
    jobs: int = 1,
) -> OperatorMatrix:
    """Column-by-column assembly of f ↦ T_σ(a f) - a T_σ f through `apply`."""
    if grid.size > size_cap:
        raise SizeCapExceededError(grid.size, size_cap)
    values = sample_function(a, grid)
    identity = np.eye(grid.size, dtype=complex)
    t_af = apply_columns(sym, grid, identity * values[np.newaxis, :], jobs)
    t_f = apply_columns(sym, grid, identity, jobs)
    return OperatorMatrix(grid, t_af - values[:, np.newaxis] * t_f, f"[{sym.name},M]-direct")


def bilinear_pair(f: GridFunction, g: GridFunction) -> complex:
    """
    ⟨f, g⟩ = h^d Σ_m f(x_m) g(x_m), without conjugation.

    Raises:
        GridMismatchError: If f and g live on different grids
    """
    if f.grid != g.grid:
        raise GridMismatchError(repr(f.grid), repr(g.grid))
    return complex(f.grid.spacing**f.grid.dimension * np.sum(f.values * g.values))
