"""
Height search and the restriction exponents it determines
"""

from .exponents import (
    ExponentReport,
    critical_p,
    decay_rate,
    dual_exponent,
    greenleaf_p,
    tomas_stein_p,
)
from .height import HeightResult, HeightSearch, height_search

__all__ = [
    'ExponentReport',
    'HeightResult',
    'HeightSearch',
    'critical_p',
    'decay_rate',
    'dual_exponent',
    'greenleaf_p',
    'height_search',
    'tomas_stein_p',
]
