"""
Sparse polynomial algebra for graph hypersurfaces x4 = phi(x1, x2, x3)

Parsing, evaluation, differentiation, linear coordinate changes and the
advisory convexity / finite-line-type checks.
"""

from .polynomial import (
    DEFAULT_PRUNE_TOL,
    LinearChange,
    Monomial,
    Polynomial,
    compose_linear,
    evaluate,
    gradient,
    hessian,
)
from .parser import PolynomialParser, PolynomialSyntaxError, parse
from .checks import ConvexityCheck, LineTypeCheck, check_convex, check_finite_line_type

__all__ = [
    'DEFAULT_PRUNE_TOL',
    'LinearChange',
    'Monomial',
    'Polynomial',
    'PolynomialParser',
    'PolynomialSyntaxError',
    'ConvexityCheck',
    'LineTypeCheck',
    'check_convex',
    'check_finite_line_type',
    'compose_linear',
    'evaluate',
    'gradient',
    'hessian',
    'parse',
]
