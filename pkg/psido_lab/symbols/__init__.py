"""Symbols, smooth building blocks and symbol-class estimates."""

from psido_lab.symbols.base import Symbol, as_multi_index, as_points
from psido_lab.symbols.estimates import (
    class_shell_estimate,
    cordes_stat,
    fd_check,
    min_peetre_margin,
    peetre_margin,
)
from psido_lab.symbols.families import (
    CallableSymbol,
    ConstantSymbol,
    DyadicFamily,
    ElementarySymbol,
    ExpressionSymbol,
    LinearCombinationSymbol,
    SeparableSymbol,
    make_elementary,
    make_separable,
)
from psido_lab.symbols.functions import (
    PROFILES,
    CallableFunction,
    ConstantFunction,
    ExpressionFunction,
    PartialDerivativeFunction,
    ProductFunction,
    RadialProfile,
    SmoothFunction,
    build_profile,
)

__all__ = [
    "Symbol",
    "as_multi_index",
    "as_points",
    "class_shell_estimate",
    "cordes_stat",
    "fd_check",
    "min_peetre_margin",
    "peetre_margin",
    "CallableSymbol",
    "ConstantSymbol",
    "DyadicFamily",
    "ElementarySymbol",
    "ExpressionSymbol",
    "LinearCombinationSymbol",
    "SeparableSymbol",
    "make_elementary",
    "make_separable",
    "PROFILES",
    "CallableFunction",
    "ConstantFunction",
    "ExpressionFunction",
    "PartialDerivativeFunction",
    "ProductFunction",
    "RadialProfile",
    "SmoothFunction",
    "build_profile",
]
