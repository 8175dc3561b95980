"""
Advisory hypothesis checks

Sampling tests for convexity and finite line type. Both are necessary-condition
checks only: a pass means no counterexample was found on the samples.
"""

import logging
from dataclasses import dataclass, asdict
from typing import Optional, Tuple

import numpy as np
from scipy.stats import norm, qmc

from .polynomial import Polynomial, hessian

logger = logging.getLogger(__name__)

PSD_TOL = 1e-9
NONZERO_TOL = 1e-12


@dataclass
class ConvexityCheck:
    """Result of sampling the Hessian on a ball"""
    convex: bool
    min_eigenvalue: float
    samples: int
    witness: Optional[Tuple[float, ...]] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class LineTypeCheck:
    """Result of restricting p to sampled lines through the origin"""
    finite: bool
    worst_order: Optional[int]
    worst_direction: Tuple[float, ...]
    directions: int

    def to_dict(self) -> dict:
        return asdict(self)


def ball_grid(nvars: int, radius: float, grid: int) -> np.ndarray:
    """Tensor grid of grid^nvars points on [-radius, radius], restricted to the closed ball"""
    axis = np.linspace(-radius, radius, grid)
    mesh = np.stack(np.meshgrid(*([axis] * nvars), indexing='ij'), axis=-1).reshape(-1, nvars)
    return mesh[np.linalg.norm(mesh, axis=1) <= radius * (1 + 1e-12)]


def check_convex(p: Polynomial, radius: float = 0.5, grid: int = 9) -> ConvexityCheck:
    """
    Sample the Hessian of p on a grid of the ball and test positive semidefiniteness

    Args:
        p: Polynomial
        radius: Ball radius (> 0)
        grid: Grid points per axis (>= 3)

    Returns:
        ConvexityCheck with the most negative eigenvalue seen and, on failure,
        the sample where it occurred
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if grid < 3:
        raise ValueError(f"grid must be at least 3, got {grid}")

    points = ball_grid(p.nvars, radius, grid)
    entries = hessian(p)
    matrices = np.empty((len(points), p.nvars, p.nvars))
    for i in range(p.nvars):
        for j in range(p.nvars):
            matrices[:, i, j] = entries[i][j](points) if not entries[i][j].is_zero else 0.0
    smallest = np.linalg.eigvalsh(matrices)[:, 0]
    worst = int(np.argmin(smallest))
    convex = bool(smallest[worst] >= -PSD_TOL)
    witness = None if convex else tuple(float(v) for v in points[worst])
    if not convex:
        logger.warning(f"Convexity check failed: Hessian eigenvalue {smallest[worst]:.3e} at {witness}")
    return ConvexityCheck(convex, float(smallest[worst]), len(points), witness)


def sample_directions(nvars: int, count: int, seed: int = 0) -> np.ndarray:
    """Coordinate axes followed by scrambled Sobol directions on the unit sphere"""
    axes = np.eye(nvars)
    extra = max(count - nvars, 0)
    if extra == 0:
        return axes[:count]
    sobol = qmc.Sobol(d=nvars, scramble=True, seed=seed)
    uniform = sobol.random_base2(int(np.ceil(np.log2(extra))))[:extra]
    gaussian = norm.ppf(np.clip(uniform, 1e-12, 1 - 1e-12))
    gaussian /= np.linalg.norm(gaussian, axis=1, keepdims=True)
    return np.vstack([axes, gaussian])


def check_finite_line_type(p: Polynomial, directions: int = 64, seed: int = 0) -> LineTypeCheck:
    """
    Find, per sampled unit direction, the first non-vanishing order of t -> p(t xi)

    Args:
        p: Polynomial
        directions: Number of sampled directions (>= 10; coordinate axes included)
        seed: Seed for the quasi-random part of the sample

    Returns:
        LineTypeCheck; finite is False with the offending direction if p
        vanishes identically along some sampled line
    """
    if directions < 10:
        raise ValueError(f"directions must be at least 10, got {directions}")
    scale = max(p.max_abs_coefficient, 1e-300)
    worst_order = 0
    worst_direction = None
    for xi in sample_directions(p.nvars, directions, seed):
        coefficients = p.restrict_to_line(xi)
        order = next(
            (n for n, c in enumerate(coefficients) if n > 0 and abs(c) > NONZERO_TOL * scale),
            None,
        )
        direction = tuple(float(v) for v in xi)
        if order is None:
            logger.warning(f"Polynomial vanishes along direction {direction}")
            return LineTypeCheck(False, None, direction, directions)
        if order > worst_order:
            worst_order, worst_direction = order, direction
    return LineTypeCheck(True, worst_order, worst_direction, directions)
