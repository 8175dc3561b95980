"""
One-dimensional Knapp profile

g(s) = exp(1 - 1/(1 - s^2)) on (-1, 1) is the frequency-side factor of every
test function. Its unitary inverse transform
    g_check(t) = (2 pi)^(-1/2) int g(s) cos(t s) ds
decays like exp(-sqrt(2t)), so its L_p norms are computed on a truncated
half-line. Norms are cached per exponent.
"""

import logging
import math
import threading
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from oscint.quadrature import composite_gauss_legendre

logger = logging.getLogger(__name__)

DEFAULT_T_MAX = 600.0
S_PANELS = 256
T_PANELS = 600
CHUNK = 512
PLANCHEREL_TOL = 1e-6


def profile(s) -> np.ndarray:
    """g(s); zero outside (-1, 1)"""
    s = np.asarray(s, dtype=float)
    out = np.zeros(s.shape)
    inside = np.abs(s) < 1.0
    with np.errstate(under='ignore'):
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


@dataclass(frozen=True)
class PlancherelCheck:
    """Spatial versus frequency-side L_2 norm of the profile"""
    spatial: float
    frequency: float
    rel_error: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            'spatial_l2': self.spatial,
            'frequency_l2': self.frequency,
            'rel_error': self.rel_error,
            'pass': self.passed,
        }


class ProfileNorms:
    """L_p norms of g_check on R, computed once per p"""

    def __init__(self, t_max: float = DEFAULT_T_MAX, s_panels: int = S_PANELS,
                 t_panels: int = T_PANELS):
        self.t_max = t_max
        self.s_nodes, self.s_weights = composite_gauss_legendre(-1.0, 1.0, s_panels)
        self.t_nodes, self.t_weights = composite_gauss_legendre(0.0, t_max, t_panels)
        self._g = profile(self.s_nodes)
        self._values: np.ndarray = None
        self._norms: Dict[float, float] = {}
        self._lock = threading.Lock()

    def inverse_transform(self, t) -> np.ndarray:
        """g_check at the given points, in chunks of the t-grid"""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.shape)
        weighted = self._g * self.s_weights
        for start in range(0, t.size, CHUNK):
            block = t[start:start + CHUNK]
            out[start:start + CHUNK] = np.cos(np.outer(block, self.s_nodes)) @ weighted
        return out / math.sqrt(2.0 * math.pi)

    def _check_values(self) -> np.ndarray:
        with self._lock:
            if self._values is None:
                self._values = self.inverse_transform(self.t_nodes)
                tail = abs(self._values[-1])
                logger.debug(f"Profile transform tail at t = {self.t_max:g}: {tail:.3e}")
            return self._values

    def lp_norm(self, p: float) -> float:
        """||g_check||_p over R (even function, twice the half-line integral)"""
        p = float(p)
        if not p >= 1.0:
            raise ValueError(f"L_p norm needs p >= 1, got {p}")
        with self._lock:
            if p in self._norms:
                return self._norms[p]
        values = self._check_values()
        norm = (2.0 * np.sum(self.t_weights * np.abs(values) ** p)) ** (1.0 / p)
        with self._lock:
            self._norms[p] = float(norm)
        return float(norm)

    def frequency_l2(self) -> float:
        """||g||_2 on the frequency side"""
        return float(math.sqrt(np.sum(self.s_weights * self._g ** 2)))

    def plancherel_check(self, tol: float = PLANCHEREL_TOL) -> PlancherelCheck:
        spatial = self.lp_norm(2.0)
        frequency = self.frequency_l2()
        rel = abs(spatial - frequency) / frequency
        if rel > tol:
            logger.warning(f"Plancherel check failed: {spatial} vs {frequency} (rel {rel:.2e})")
        return PlancherelCheck(spatial, frequency, rel, rel <= tol)


_default_norms = None
_default_lock = threading.Lock()


def default_norms() -> ProfileNorms:
    """Shared ProfileNorms with the default grids"""
    global _default_norms
    with _default_lock:
        if _default_norms is None:
            _default_norms = ProfileNorms()
        return _default_norms


def plancherel_check(tol: float = PLANCHEREL_TOL) -> PlancherelCheck:
    return default_norms().plancherel_check(tol)


def width_factor(weights: Tuple[float, ...], p: float) -> float:
    """prod w_j^(1 - 1/p): the width factor of ||f||_p for f_hat = prod g(xi_j / w_j)"""
    return float(np.prod(np.asarray(weights, dtype=float) ** (1.0 - 1.0 / float(p))))
