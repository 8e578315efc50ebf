"""
Build functions and symbols from config specs.
"""

import logging

from psido_lab.calculus import truncate
from psido_lab.errors import InvalidSymbolError
from psido_lab.schema.schema import FunctionSpec, SymbolFamily, SymbolSpec
from psido_lab.symbols.base import Symbol
from psido_lab.symbols.families import (
    ConstantSymbol,
    DyadicFamily,
    ElementarySymbol,
    ExpressionSymbol,
    SeparableSymbol,
)
from psido_lab.symbols.functions import (
    ConstantFunction,
    ExpressionFunction,
    ProductFunction,
    SmoothFunction,
    build_profile,
)

logger = logging.getLogger(__name__)


def build_function(spec: FunctionSpec, dimension: int) -> SmoothFunction:
    """
    Build a smooth function from a FunctionSpec.

    Exactly one of `profile` and `expression` must be set; `times` multiplies the
    result by another function.

    Raises:
        InvalidSymbolError: If neither or both sources are given
        UnknownProfileError: If the profile is not registered
    """
    if (spec.profile is None) == (spec.expression is None):
        raise InvalidSymbolError("set exactly one of 'profile' and 'expression'", field="function")

    func: SmoothFunction
    if spec.profile is not None:
        func = build_profile(spec.profile, dimension, spec.params)
        if spec.support_radius is not None:
            func.support_radius = spec.support_radius
    else:
        func = ExpressionFunction(spec.expression, dimension, support_radius=spec.support_radius)  # type: ignore[arg-type]

    if spec.times is not None:
        func = ProductFunction(func, build_function(spec.times, dimension))
    return func


def build_symbol(spec: SymbolSpec, dimension: int) -> Symbol:
    """
    Build a symbol from a SymbolSpec.

    Args:
        spec: Symbol description from the experiment config
        dimension: Grid dimension d

    Returns:
        The symbol, truncated when the spec carries a `truncate` block
    """
    sym: Symbol
    options = {
        "max_analytic_order": spec.max_analytic_order,
        "allow_finite_differences": spec.allow_finite_differences,
    }

    if spec.family is SymbolFamily.CONSTANT:
        sym = ConstantSymbol(spec.value, dimension)
    elif spec.family is SymbolFamily.SEPARABLE:
        m = build_function(spec.m, dimension) if spec.m else ConstantFunction(1.0, dimension)
        psi = build_function(spec.psi, dimension) if spec.psi else build_profile("window", dimension)
        sym = SeparableSymbol(m, psi, order=spec.order or 0.0, **options)
    elif spec.family is SymbolFamily.ELEMENTARY:
        m = build_function(spec.m, dimension) if spec.m else ConstantFunction(1.0, dimension)
        psi = build_function(spec.psi, dimension) if spec.psi else build_profile("annulus", dimension)
        family = DyadicFamily(m, weight_exponent=spec.weight_exponent)
        sym = ElementarySymbol(
            family, psi, order_shift=spec.order_shift, j_max=spec.j_max, **options
        )
    else:
        if not spec.expression:
            raise InvalidSymbolError("expression symbols need 'expression'", field="expression")
        sym = ExpressionSymbol(
            spec.expression,
            dimension,
            order=spec.order or 0.0,
            x_support_radius=spec.x_support_radius,
            **options,
        )

    if spec.x_support_radius is not None and sym.x_support_radius is None:
        sym.x_support_radius = spec.x_support_radius

    if spec.truncate is not None:
        window = build_function(spec.truncate.window, 2 * dimension)
        sym = truncate(sym, spec.truncate.epsilon, window)

    logger.debug(f"Built symbol {sym!r}")
    return sym
