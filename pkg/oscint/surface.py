"""
Surface patches and measure weights

A SurfacePatch is the graph x4 = phi(x) over the ball |x| < r carrying the
measure psi dS. Weights are evaluated on stacks of points in parameter space;
W(x) = sqrt(1 + |grad phi|^2) is the area element of the graph.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy import integrate

from polyalg import Polynomial, evaluate, gradient

logger = logging.getLogger(__name__)

BUMP_KINDS = ('smooth_exp', 'poly_power')
DEFAULT_BUMP_RADIUS = 0.5


@dataclass(frozen=True)
class SurfacePatch:
    """Graph of phi over the ball of radius bump_radius with cutoff psi"""
    phi: Polynomial
    bump_radius: float = DEFAULT_BUMP_RADIUS
    bump_kind: str = 'smooth_exp'
    bump_power: int = 2
    include_area_factor: bool = True
    _gradient: Tuple[Polynomial, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.bump_radius > 0 or not math.isfinite(self.bump_radius):
            raise ValueError(f"bump_radius must be positive and finite, got {self.bump_radius}")
        if self.bump_kind not in BUMP_KINDS:
            raise ValueError(f"Unknown bump kind '{self.bump_kind}', expected one of {BUMP_KINDS}")
        if self.bump_kind == 'poly_power' and self.bump_power < 1:
            raise ValueError(f"poly_power bump needs a power >= 1, got {self.bump_power}")
        object.__setattr__(self, '_gradient', tuple(gradient(self.phi)))

    @property
    def nvars(self) -> int:
        return self.phi.nvars

    # ------------------------------------------------------------------
    # Weights
    # ------------------------------------------------------------------

    def bump_values(self, x: np.ndarray) -> np.ndarray:
        """psi on a stack of points; zero outside the open ball"""
        x = np.asarray(x, dtype=float)
        s = np.sum(x * x, axis=-1) / self.bump_radius ** 2
        inside = s < 1.0
        out = np.zeros(s.shape)
        if self.bump_kind == 'smooth_exp':
            with np.errstate(under='ignore'):
                out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
        else:
            out[inside] = (1.0 - s[inside]) ** self.bump_power
        return out

    def area_factor(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if not self.include_area_factor:
            return np.ones(x.shape[:-1])
        squared = sum(np.asarray(evaluate(g, x)) ** 2 for g in self._gradient)
        return np.sqrt(1.0 + squared)

    def weight(self, x: np.ndarray) -> np.ndarray:
        """psi(x) * W(x)"""
        return self.bump_values(x) * self.area_factor(x)

    def height(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(evaluate(self.phi, np.asarray(x, dtype=float)))

    # ------------------------------------------------------------------
    # Bounds
    # ------------------------------------------------------------------

    def gradient_bounds(self) -> List[float]:
        """
        Bound max |d phi / d x_i| over the box [-r, r]^n

        Interval evaluation of each partial derivative on the symmetric box:
        a monomial c x^k contributes at most |c| r^|k|.
        """
        r = self.bump_radius
        return [sum(abs(t.coefficient) * r ** t.degree for t in g.terms) for g in self._gradient]

    def to_dict(self) -> dict:
        return {
            'phi': str(self.phi),
            'bump_radius': self.bump_radius,
            'bump_kind': self.bump_kind,
            'bump_power': self.bump_power,
            'include_area_factor': self.include_area_factor,
        }


# ============================================================================
# ORACLES
# ============================================================================

def stationary_phase_amplitude(hessian_det: float, n: int) -> float:
    """Leading constant (2 pi)^(n/2) |det H|^(-1/2) of a nondegenerate critical point"""
    if hessian_det == 0:
        raise ValueError("Stationary phase needs a nondegenerate Hessian")
    return (2.0 * math.pi) ** (n / 2.0) / math.sqrt(abs(hessian_det))


def _is_unit_paraboloid(phi: Polynomial) -> bool:
    target = Polynomial.from_dict(
        {tuple(2 if j == i else 0 for j in range(phi.nvars)): 1.0 for i in range(phi.nvars)},
        phi.nvars,
    )
    return phi.isclose(target, rel_tol=1e-12)


def radial_oracle(patch: SurfacePatch, lam: float, epsabs: float = 1e-14,
                  epsrel: float = 1e-12, limit: int = 400) -> complex:
    """
    J(0, 0, 0, lam) for phi = |x|^2 on R^3 by a one-dimensional integral

    With u = |x|^2 the transform reduces to
    2 pi * int_0^{r^2} e^{i lam u} sqrt(u) psi(sqrt(u)) W(u) du,
    W = sqrt(1 + 4u) when the area factor is on. The cosine and sine parts
    go through QUADPACK's oscillatory weights.

    Raises:
        ValueError: If the patch is not the unit paraboloid in three variables
    """
    if patch.nvars != 3 or not _is_unit_paraboloid(patch.phi):
        raise ValueError(f"radial_oracle needs phi = x1^2+x2^2+x3^2, got {patch.phi}")

    def amplitude(u: float) -> float:
        rho = math.sqrt(max(u, 0.0))
        psi = float(patch.bump_values(np.array([rho, 0.0, 0.0])))
        area = math.sqrt(1.0 + 4.0 * u) if patch.include_area_factor else 1.0
        return rho * psi * area

    upper = patch.bump_radius ** 2
    if lam == 0:
        real, _ = integrate.quad(amplitude, 0.0, upper, epsabs=epsabs, epsrel=epsrel, limit=limit)
        return complex(2.0 * math.pi * real, 0.0)
    real, _ = integrate.quad(amplitude, 0.0, upper, weight='cos', wvar=lam,
                             epsabs=epsabs, epsrel=epsrel, limit=limit)
    imag, _ = integrate.quad(amplitude, 0.0, upper, weight='sin', wvar=lam,
                             epsabs=epsabs, epsrel=epsrel, limit=limit)
    return complex(2.0 * math.pi * real, 2.0 * math.pi * imag)


def radial_mass(patch: SurfacePatch) -> float:
    """int psi W dx for a radially symmetric weight, as 4 pi int rho^2 psi W drho"""
    if patch.include_area_factor and not _is_unit_paraboloid(patch.phi):
        raise ValueError("radial_mass needs a radial area factor (phi = |x|^2 or the factor off)")

    def integrand(rho: float) -> float:
        x = np.zeros(patch.nvars)
        x[0] = rho
        psi = float(patch.bump_values(x))
        area = math.sqrt(1.0 + 4.0 * rho * rho) if patch.include_area_factor else 1.0
        return rho ** (patch.nvars - 1) * psi * area

    value, _ = integrate.quad(integrand, 0.0, patch.bump_radius, epsabs=1e-15, epsrel=1e-13, limit=200)
    surface = 2.0 * math.pi ** (patch.nvars / 2.0) / math.gamma(patch.nvars / 2.0)
    return surface * value
