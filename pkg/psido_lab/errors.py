"""
Exception types for psido-lab.

Every error raised by the library derives from PsidoError and carries the
values needed to report it without re-parsing the message.
"""


class PsidoError(Exception):
    """Base class for all psido-lab errors."""


class OrderExceededError(PsidoError):
    """Raised when a derivative beyond the analytic order is requested without a fallback."""

    def __init__(self, requested: int, limit: int, symbol: str = "symbol"):
        super().__init__(
            f"{symbol}: derivative of total order {requested} exceeds the analytic limit {limit} "
            "and finite differences are disabled"
        )
        self.requested = requested
        self.limit = limit
        self.symbol = symbol


class InvalidSymbolError(PsidoError):
    """Raised when a symbol or window does not satisfy its construction requirements."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class UnknownProfileError(PsidoError):
    """Raised when a built-in profile identifier is not known."""

    def __init__(self, name: str, available: list[str]):
        super().__init__(f"Unknown profile '{name}' (available: {', '.join(sorted(available))})")
        self.name = name
        self.available = available


class GridMismatchError(PsidoError):
    """Raised when two objects defined on different grids are combined."""

    def __init__(self, expected: str, actual: str):
        super().__init__(f"Grid mismatch: expected {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class SizeCapExceededError(PsidoError):
    """Raised when a dense matrix would exceed the configured size cap."""

    def __init__(self, size: int, cap: int):
        super().__init__(f"Dense operator of size {size} exceeds the cap n^d <= {cap}")
        self.size = size
        self.cap = cap


class SupportEscapesTorusError(PsidoError):
    """Raised when a scaled bump is not contained in the torus-safe region."""

    def __init__(self, center_norm: float, radius: float, limit: float):
        super().__init__(
            f"Ball of radius {radius:g} around a center of norm {center_norm:g} "
            f"leaves the safe region |x| <= {limit:g}"
        )
        self.center_norm = center_norm
        self.radius = radius
        self.limit = limit


class QuadratureConvergenceError(PsidoError):
    """Raised in strict mode when doubling the quadrature nodes changes a component."""

    def __init__(self, component: int, change: float, nodes: int):
        super().__init__(
            f"Component {component}: doubling {nodes} Gauss-Legendre nodes changed the value "
            f"by {change:.3e} (relative)"
        )
        self.component = component
        self.change = change
        self.nodes = nodes


class SpectrumError(PsidoError):
    """Raised when the singular value decomposition does not converge."""

    def __init__(self, message: str, shape: tuple[int, ...]):
        super().__init__(f"{message} (matrix shape {shape})")
        self.shape = shape


class ConfigError(PsidoError):
    """Raised when an experiment config fails validation; carries every error found."""

    def __init__(self, errors: list[str]):
        super().__init__("Invalid experiment config:\n" + "\n".join(f"  - {e}" for e in errors))
        self.errors = errors


class ReportWriteError(PsidoError):
    """Raised when a result file cannot be written."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"Cannot write {path}: {reason}")
        self.path = path
        self.reason = reason
