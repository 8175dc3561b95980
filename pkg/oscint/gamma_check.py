"""
Growth bound for 1/Gamma on the line 1 + iy

The reflection formula gives |1/Gamma(1+iy)|^2 = sinh(pi y)/(pi y), so
|1/Gamma(1+iy)| e^{-pi|y|} has the closed form
sqrt(-e^{-pi|y|} expm1(-2 pi |y|) / (2 pi |y|)) with value 1 at y = 0.
"""

import logging
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

MIN_GRID = 100


def gamma_ratio(y) -> np.ndarray:
    """|1/Gamma(1+iy)| * exp(-pi |y|), vectorized and stable for large |y|"""
    a = np.pi * np.abs(np.asarray(y, dtype=float))
    out = np.ones(a.shape)
    nonzero = a > 0
    an = a[nonzero]
    with np.errstate(under='ignore'):
        out[nonzero] = np.sqrt(-np.exp(-an) * np.expm1(-2.0 * an) / (2.0 * an))
    return out


def gamma_bound_check(y_max: float, n: int) -> Tuple[float, float]:
    """
    Largest ratio on an n-point grid of [-y_max, y_max]

    Returns:
        (max_ratio, argmax)

    Raises:
        ValueError: If y_max <= 0 or n < 100
    """
    if not y_max > 0:
        raise ValueError(f"y_max must be positive, got {y_max}")
    if n < MIN_GRID:
        raise ValueError(f"grid needs at least {MIN_GRID} points, got {n}")
    grid = np.linspace(-y_max, y_max, n)
    ratio = gamma_ratio(grid)
    k = int(np.argmax(ratio))
    max_ratio, argmax = float(ratio[k]), float(grid[k])
    if not np.isfinite(max_ratio) or max_ratio > 1.0 + 1e-15:
        logger.warning(f"Gamma bound exceeded: ratio {max_ratio} at y = {argmax}")
    return max_ratio, argmax
