"""
Fourier transform of the surface measure by tensor Gauss-Legendre panels

J(xi) = int exp(i(xi' . x + xi_{n+1} phi(x))) psi(x) W(x) dx over the bump
support. The panel count per axis follows the fastest local oscillation; a
result is accepted once doubling the panels changes it by less than the
tolerance. Only nodes inside the bump ball are evaluated, one x1-slice at a
time.
"""

import logging
import math
import threading
from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .surface import SurfacePatch
from tool.schema import format_real

logger = logging.getLogger(__name__)

GL_ORDER = 8
MIN_PANELS = 16
MIN_NODES_PER_WAVELENGTH = 4.0
DEFAULT_NODES_PER_WAVELENGTH = 4.0
DEFAULT_BUDGET = 200_000_000
DEFAULT_REL_TOL = 1e-6
ABS_TOL_FACTOR = 1e-13
MAX_DOUBLINGS = 4


class QuadratureBudgetError(RuntimeError):
    """The next grid would exceed the evaluation budget"""

    def __init__(self, evaluations: int, budget: int, xi: Optional[Sequence[float]] = None):
        self.evaluations = evaluations
        self.budget = budget
        self.xi = None if xi is None else tuple(float(v) for v in xi)
        self.partial = []
        super().__init__(f"Quadrature at xi={self.xi} needs {evaluations} evaluations, budget is {budget}")


class ConvergenceError(RuntimeError):
    """Doubling the panel count kept changing the value beyond tolerance"""

    def __init__(self, coarse: complex, fine: complex, panels: int,
                 xi: Optional[Sequence[float]] = None):
        self.coarse = coarse
        self.fine = fine
        self.panels = panels
        self.xi = None if xi is None else tuple(float(v) for v in xi)
        self.partial = []
        super().__init__(
            f"Quadrature at xi={self.xi} did not converge: {coarse!r} vs {fine!r} at {panels} panels per axis"
        )


def composite_gauss_legendre(a: float, b: float, panels: int,
                             order: int = GL_ORDER) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of `panels` equal Gauss-Legendre panels on [a, b]"""
    if panels < 1:
        raise ValueError(f"panels must be positive, got {panels}")
    ref_nodes, ref_weights = leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * ref_nodes[None, :]).ravel()
    weights = (half[:, None] * ref_weights[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class QuadratureResult:
    """Accepted value of J(xi) with its guard data"""
    xi: Tuple[float, ...]
    value: complex
    coarse_value: complex
    panels_per_axis: int
    evaluations: int
    converged: bool

    @property
    def abs_value(self) -> float:
        return abs(self.value)

    def to_dict(self) -> dict:
        return {
            'xi': [format_real(v) for v in self.xi],
            're': format_real(self.value.real),
            'im': format_real(self.value.imag),
            'abs': format_real(self.abs_value),
            'panels_per_axis': self.panels_per_axis,
            'evaluations': self.evaluations,
            'converged': self.converged,
        }


class SurfaceQuadrature:
    """Panel quadrature of J(xi) for one surface patch"""

    def __init__(self, patch: SurfacePatch, order: int = GL_ORDER, min_panels: int = MIN_PANELS,
                 budget: int = DEFAULT_BUDGET, rel_tol: float = DEFAULT_REL_TOL,
                 abs_tol_factor: float = ABS_TOL_FACTOR, max_doublings: int = MAX_DOUBLINGS):
        """
        Initialize SurfaceQuadrature

        Args:
            patch: Surface patch carrying phi and the weight
            order: Gauss-Legendre order per panel
            min_panels: Floor on panels per axis
            budget: Largest number of integrand evaluations on one grid
            rel_tol: Relative tolerance of the doubling guard
            abs_tol_factor: Absolute tolerance as a multiple of int psi W
            max_doublings: Extra doublings tried before giving up
        """
        self.patch = patch
        self.order = order
        self.min_panels = min_panels
        self.budget = budget
        self.rel_tol = rel_tol
        self.abs_tol_factor = abs_tol_factor
        self.max_doublings = max_doublings
        self._counts: Dict[int, int] = {}
        self._mass: Optional[float] = None
        self._lock = threading.Lock()

    # ------------------------------------------------------------------
    # Grids
    # ------------------------------------------------------------------

    def _rest_grid(self, nodes: np.ndarray, weights: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Flattened tensor grid over x2..xn"""
        n = self.patch.nvars
        if n == 1:
            return np.zeros((1, 0)), np.ones(1)
        mesh = np.meshgrid(*([nodes] * (n - 1)), indexing='ij')
        wmesh = np.meshgrid(*([weights] * (n - 1)), indexing='ij')
        points = np.stack([m.ravel() for m in mesh], axis=-1)
        rest_weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)
        return points, rest_weights

    def oscillations(self, xi: np.ndarray) -> float:
        """Largest per-axis count of phase oscillations across the support box"""
        r = self.patch.bump_radius
        bounds = self.patch.gradient_bounds()
        tangential = xi[:-1]
        normal = abs(xi[-1])
        per_axis = [(abs(tangential[i]) + normal * bounds[i]) * 2.0 * r / (2.0 * math.pi)
                    for i in range(self.patch.nvars)]
        return max(per_axis) if per_axis else 0.0

    def panel_count(self, xi: np.ndarray, nodes_per_wavelength: float) -> int:
        wanted = math.ceil(nodes_per_wavelength * self.oscillations(xi) / self.order)
        return max(self.min_panels, wanted)

    def evaluations(self, panels: int) -> int:
        """Number of grid nodes strictly inside the bump ball"""
        with self._lock:
            if panels in self._counts:
                return self._counts[panels]
        r = self.patch.bump_radius
        nodes, weights = composite_gauss_legendre(-r, r, panels, self.order)
        rest, _ = self._rest_grid(nodes, weights)
        rest_sq = np.sort(np.sum(rest * rest, axis=-1))
        count = 0
        for x1 in nodes:
            limit = r * r - x1 * x1
            if limit > 0:
                count += int(np.searchsorted(rest_sq, limit, side='left'))
        with self._lock:
            self._counts[panels] = count
        return count

    # ------------------------------------------------------------------
    # Integration
    # ------------------------------------------------------------------

    def integrate(self, xi: np.ndarray, panels: int) -> complex:
        """One tensor-grid evaluation of J(xi) at a fixed panel count"""
        r = self.patch.bump_radius
        nodes, weights = composite_gauss_legendre(-r, r, panels, self.order)
        rest, rest_weights = self._rest_grid(nodes, weights)
        rest_sq = np.sum(rest * rest, axis=-1)
        tangential = np.asarray(xi[:-1], dtype=float)
        normal = float(xi[-1])

        total = 0.0 + 0.0j
        for x1, w1 in zip(nodes, weights):
            mask = rest_sq < r * r - x1 * x1
            if not np.any(mask):
                continue
            points = np.empty((int(mask.sum()), self.patch.nvars))
            points[:, 0] = x1
            points[:, 1:] = rest[mask]
            phase = points @ tangential
            if normal != 0.0:
                phase = phase + normal * self.patch.height(points)
            values = self.patch.weight(points) * np.exp(1j * phase)
            total += w1 * np.sum(values * rest_weights[mask])
        return complex(total)

    @property
    def mass(self) -> float:
        """int psi W dx at twice the minimum panel count"""
        if self._mass is None:
            zero = np.zeros(self.patch.nvars + 1)
            self._mass = self.integrate(zero, 2 * self.min_panels).real
        return self._mass

    @property
    def abs_tol(self) -> float:
        return self.abs_tol_factor * abs(self.mass)

    def compute(self, xi: Sequence[float], nodes_per_wavelength: float = DEFAULT_NODES_PER_WAVELENGTH,
                strict: bool = True) -> QuadratureResult:
        """
        J(xi) with the doubling guard

        Args:
            xi: Frequency (n + 1 components, last one along the graph axis)
            nodes_per_wavelength: Resolution of the fastest local oscillation
            strict: Raise ConvergenceError instead of returning an unconverged result

        Returns:
            QuadratureResult at the finer of the last two grids

        Raises:
            ValueError: On a malformed frequency or too few nodes per wavelength
            QuadratureBudgetError: If the first guarded grid exceeds the budget
            ConvergenceError: If strict and the guard never passes within budget
        """
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.patch.nvars + 1,) or not np.all(np.isfinite(xi)):
            raise ValueError(f"Expected a finite frequency with {self.patch.nvars + 1} components, got {xi}")
        if nodes_per_wavelength < MIN_NODES_PER_WAVELENGTH:
            raise ValueError(f"nodes_per_wavelength must be >= {MIN_NODES_PER_WAVELENGTH}, "
                             f"got {nodes_per_wavelength}")

        panels = self.panel_count(xi, nodes_per_wavelength)
        fine_panels = 2 * panels
        needed = self.evaluations(fine_panels)
        if needed > self.budget:
            raise QuadratureBudgetError(needed, self.budget, xi)

        abs_tol = self.abs_tol
        spent = self.evaluations(panels)
        coarse = self.integrate(xi, panels)
        fine = coarse
        for attempt in range(self.max_doublings + 1):
            fine = self.integrate(xi, fine_panels)
            spent += self.evaluations(fine_panels)
            if abs(fine - coarse) <= self.rel_tol * abs(fine) + abs_tol:
                return QuadratureResult(tuple(xi.tolist()), fine, coarse, fine_panels, spent, True)
            if attempt == self.max_doublings or self.evaluations(2 * fine_panels) > self.budget:
                break
            logger.debug(f"Guard failed at {fine_panels} panels for xi={xi.tolist()}; doubling")
            coarse, fine_panels = fine, 2 * fine_panels

        if strict:
            raise ConvergenceError(coarse, fine, fine_panels, xi)
        logger.warning(f"Quadrature at xi={xi.tolist()} unconverged: |delta| = {abs(fine - coarse):.3e}")
        return QuadratureResult(tuple(xi.tolist()), fine, coarse, fine_panels, spent, False)


def fourier_surface_measure(sp: SurfacePatch, xi: Sequence[float],
                            nodes_per_wavelength: float = DEFAULT_NODES_PER_WAVELENGTH,
                            budget: int = DEFAULT_BUDGET) -> complex:
    """J(xi) = int_S exp(i <x, xi>) dmu(x), guarded against under-resolution"""
    return SurfaceQuadrature(sp, budget=budget).compute(xi, nodes_per_wavelength).value
