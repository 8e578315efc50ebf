"""
Sympy-backed expressions with cached analytic derivatives.

An expression is parsed once; each requested tuple of partial derivative
orders is differentiated symbolically and compiled with lambdify on first use.
"""

import logging
import threading
from collections.abc import Callable, Sequence

import numpy as np
import sympy

from psido_lab.errors import InvalidSymbolError

logger = logging.getLogger(__name__)


class CompiledExpression:
    """A sympy expression in fixed variables with lazily compiled derivatives."""

    def __init__(
        self,
        expression: str | sympy.Expr,
        variables: Sequence[str],
        aliases: dict[str, str] | None = None,
    ):
        """
        Parse an expression.

        Args:
            expression: Sympy expression or string
            variables: Canonical variable names, in argument order
            aliases: Extra accepted names mapped to canonical names

        Raises:
            InvalidSymbolError: If the expression cannot be parsed or uses unknown names
        """
        aliases = aliases or {}
        self.variables = list(variables)
        self._symbols = [sympy.Symbol(v, real=True) for v in self.variables]
        canonical = dict(zip(self.variables, self._symbols))
        alias_symbols = {a: sympy.Symbol(a, real=True) for a in aliases}

        if isinstance(expression, sympy.Expr):
            expr = expression
        else:
            try:
                expr = sympy.sympify(expression, locals={**canonical, **alias_symbols})
            except (sympy.SympifyError, SyntaxError, TypeError) as e:
                raise InvalidSymbolError(f"cannot parse expression {expression!r}: {e}") from e

        expr = expr.subs({alias_symbols[a]: canonical[c] for a, c in aliases.items()})
        unknown = {str(s) for s in expr.free_symbols} - set(self.variables)
        if unknown:
            raise InvalidSymbolError(
                f"expression {expression!r} uses unknown variables {sorted(unknown)}; "
                f"allowed: {self.variables + sorted(aliases)}"
            )

        self.expression = expr
        self._cache: dict[tuple[int, ...], Callable[..., object]] = {}
        self._lock = threading.Lock()

    def _compiled(self, orders: tuple[int, ...]) -> Callable[..., object]:
        with self._lock:
            fn = self._cache.get(orders)
            if fn is None:
                spec = [(s, k) for s, k in zip(self._symbols, orders) if k > 0]
                derived = sympy.diff(self.expression, *spec) if spec else self.expression
                fn = sympy.lambdify(self._symbols, derived, "numpy")
                self._cache[orders] = fn
                logger.debug(f"Compiled derivative {orders} of {self.expression}")
        return fn

    def evaluate(self, coords: Sequence[np.ndarray], orders: tuple[int, ...]) -> np.ndarray:
        """
        Evaluate a partial derivative.

        Args:
            coords: One array per variable, mutually broadcastable
            orders: Derivative order per variable

        Returns:
            Complex array of the broadcast shape
        """
        shape = np.broadcast_shapes(*(np.shape(c) for c in coords))
        value = self._compiled(tuple(orders))(*coords)
        return np.array(np.broadcast_to(np.asarray(value, dtype=complex), shape))

    def __str__(self) -> str:
        return str(self.expression)
