"""
Decay exponent of the surface-measure transform

Samples |J(lambda * omega)| on a geometric magnitude grid for a set of unit
directions omega, fits log|J| against log lambda per direction and reports
the slowest-decaying direction as the fitted exponent.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import norm, qmc

from .quadrature import (
    DEFAULT_BUDGET,
    DEFAULT_NODES_PER_WAVELENGTH,
    DEFAULT_REL_TOL,
    ConvergenceError,
    QuadratureBudgetError,
    QuadratureResult,
    SurfaceQuadrature,
)
from .surface import SurfacePatch
from tool.schema import format_rational, format_real

logger = logging.getLogger(__name__)

CSV_COLUMNS = ['dir_index', 'xi1', 'xi2', 'xi3', 'xi4', 'abs_xi', 're_J', 'im_J', 'abs_J',
               'panels_per_axis', 'converged']
MIN_MAGNITUDES = 8
MIN_OCTAVES = 5
MIN_FIT_SAMPLES = 3
DEFAULT_MAX_TILT = 0.1
CONFORMANCE_SLACK = 0.15


@dataclass(frozen=True)
class DecaySample:
    dir_index: int
    abs_xi: float
    result: QuadratureResult

    @property
    def abs_J(self) -> float:
        return self.result.abs_value

    def to_row(self) -> list:
        xi = list(self.result.xi)
        return [self.dir_index, *xi, self.abs_xi, self.result.value.real, self.result.value.imag,
                self.abs_J, self.result.panels_per_axis, self.result.converged]


@dataclass(frozen=True)
class DirectionSlope:
    """Least-squares fit of log|J| against log|xi| along one direction"""
    index: int
    direction: Tuple[float, ...]
    slope: float
    intercept: float
    stderr: float
    n_samples: int
    rapid_decay: bool = False

    def to_dict(self) -> dict:
        return {
            'index': self.index,
            'direction': [format_real(v) for v in self.direction],
            'slope': format_real(self.slope),
            'intercept': format_real(self.intercept),
            'stderr': format_real(self.stderr),
            'n_samples': self.n_samples,
            'rapid_decay': self.rapid_decay,
        }


@dataclass
class DecayFit:
    """Sampled |J| with per-direction slopes and the worst-direction exponent"""
    samples: List[DecaySample]
    directions: List[Tuple[float, ...]]
    magnitudes: List[float]
    slopes: List[DirectionSlope]
    fitted_exponent: float
    fit_stderr: float
    worst_direction: int
    dropped: int = 0
    warnings: List[str] = field(default_factory=list)

    def conforms(self, h: Union[Fraction, float], slack: float = CONFORMANCE_SLACK) -> bool:
        """Every fitted slope is at most -1/h + slack"""
        bound = -1.0 / float(h) + slack
        return all(s.slope <= bound for s in self.slopes if not s.rapid_decay)

    def rows(self) -> List[list]:
        return [s.to_row() for s in self.samples]

    def summary(self, h: Optional[Union[Fraction, float]] = None,
                slack: float = CONFORMANCE_SLACK) -> dict:
        """JSON summary; with h the reference exponent and the conformance verdict are added"""
        result = {
            'fitted_exponent': format_real(self.fitted_exponent),
            'fit_stderr': format_real(self.fit_stderr),
            'worst_direction': self.worst_direction,
            'worst_slope': format_real(-self.fitted_exponent),
            'direction_slopes': [s.to_dict() for s in self.slopes],
            'magnitudes': [format_real(m) for m in self.magnitudes],
            'n_samples': len(self.samples),
            'dropped': self.dropped,
            'all_converged': all(s.result.converged for s in self.samples),
            'warnings': list(self.warnings),
        }
        if h is not None:
            result['reference_exponent'] = format_real(1.0 / float(h))
            if isinstance(h, Fraction):
                result['h'] = format_rational(h)
            result['conforms'] = self.conforms(h, slack)
        return result

    def to_dict(self) -> dict:
        return self.summary()


# ============================================================================
# DIRECTIONS AND FITS
# ============================================================================

def decay_directions(n_dirs: int, seed: int = 0, max_tilt: float = DEFAULT_MAX_TILT,
                     nvars: int = 3) -> np.ndarray:
    """
    The normal (0, ..., 0, 1) followed by Sobol directions tilted by at most max_tilt

    Tilt angles are area-uniform on the polar cap; azimuths come from
    Gaussian-mapped Sobol points.
    """
    if n_dirs < 1:
        raise ValueError(f"n_dirs must be at least 1, got {n_dirs}")
    if not 0.0 <= max_tilt < math.pi / 2:
        raise ValueError(f"max_tilt must lie in [0, pi/2), got {max_tilt}")
    normal = np.zeros(nvars + 1)
    normal[-1] = 1.0
    extra = n_dirs - 1
    if extra == 0:
        return normal[None, :]
    sobol = qmc.Sobol(d=nvars + 1, scramble=True, seed=seed)
    uniform = sobol.random_base2(max(int(np.ceil(np.log2(extra))), 0))[:extra]
    tilt = max_tilt * np.sqrt(uniform[:, 0])
    azimuth = norm.ppf(np.clip(uniform[:, 1:], 1e-12, 1 - 1e-12))
    azimuth /= np.linalg.norm(azimuth, axis=1, keepdims=True)
    tilted = np.hstack([np.sin(tilt)[:, None] * azimuth, np.cos(tilt)[:, None]])
    return np.vstack([normal, tilted])


def magnitude_grid(mag_min: float, mag_max: float, n_mags: int) -> np.ndarray:
    """Geometric grid; needs at least 8 magnitudes over at least 5 octaves"""
    if n_mags < MIN_MAGNITUDES:
        raise ValueError(f"n_mags must be at least {MIN_MAGNITUDES}, got {n_mags}")
    if not mag_min > 0 or mag_max < 2 ** MIN_OCTAVES * mag_min:
        raise ValueError(f"Magnitude range [{mag_min}, {mag_max}] must span at least {MIN_OCTAVES} octaves")
    return np.geomspace(mag_min, mag_max, n_mags)


def fit_loglog(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, float]:
    """
    Ordinary least squares of log y against log x

    Returns:
        (slope, intercept, slope standard error); the error is nan with three or fewer points

    Raises:
        ValueError: On non-positive data or fewer than two points
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("fit_loglog needs two equally sized samples of at least two points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("fit_loglog needs strictly positive data")
    logx, logy = np.log(x), np.log(y)
    if x.size <= 3:
        slope, intercept = np.polyfit(logx, logy, 1)
        return float(slope), float(intercept), math.nan
    coeffs, cov = np.polyfit(logx, logy, 1, cov=True)
    return float(coeffs[0]), float(coeffs[1]), float(np.sqrt(max(cov[0, 0], 0.0)))


# ============================================================================
# OPERATION
# ============================================================================

def decay_fit(sp: SurfacePatch, mag_min: float, mag_max: float, n_mags: int, n_dirs: int,
              seed: int = 0, nodes_per_wavelength: float = DEFAULT_NODES_PER_WAVELENGTH,
              max_tilt: float = DEFAULT_MAX_TILT, budget: int = DEFAULT_BUDGET,
              rel_tol: float = DEFAULT_REL_TOL, workers: int = 1, strict: bool = True) -> DecayFit:
    """
    Sample |J| over directions and magnitudes and fit the decay exponent

    Args:
        sp: Surface patch
        mag_min, mag_max: Magnitude range (mag_max >= 32 * mag_min)
        n_mags: Number of geometric magnitudes (>= 8)
        n_dirs: Number of directions, the normal included (>= 1)
        seed: Sobol scrambling seed
        nodes_per_wavelength: Quadrature resolution
        max_tilt: Largest angle between a direction and the normal
        budget: Per-grid evaluation budget
        rel_tol: Relative tolerance of the panel-doubling guard
        workers: Thread pool size; the result does not depend on it
        strict: Propagate convergence failures instead of keeping flagged samples

    Returns:
        DecayFit

    Raises:
        QuadratureBudgetError, ConvergenceError: With the samples finished so far in `.partial`
        ValueError: If no direction keeps enough samples for a fit
    """
    directions = decay_directions(n_dirs, seed=seed, max_tilt=max_tilt, nvars=sp.nvars)
    magnitudes = magnitude_grid(mag_min, mag_max, n_mags)
    quadrature = SurfaceQuadrature(sp, budget=budget, rel_tol=rel_tol)
    floor = quadrature.abs_tol
    tasks = [(d, m) for d in range(len(directions)) for m in range(len(magnitudes))]
    logger.info(f"Decay fit: {len(directions)} directions x {len(magnitudes)} magnitudes "
                f"in [{mag_min:g}, {mag_max:g}]")

    def run(task: Tuple[int, int]) -> DecaySample:
        d, m = task
        xi = magnitudes[m] * directions[d]
        result = quadrature.compute(xi, nodes_per_wavelength, strict=strict)
        return DecaySample(d, float(magnitudes[m]), result)

    finished: Dict[int, DecaySample] = {}
    failures: Dict[int, Exception] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_to_index = {executor.submit(run, task): k for k, task in enumerate(tasks)}
        for future in as_completed(future_to_index):
            k = future_to_index[future]
            try:
                finished[k] = future.result()
            except (QuadratureBudgetError, ConvergenceError) as exc:
                failures[k] = exc

    ordered = [finished[k] for k in sorted(finished)]
    if failures:
        first = failures[min(failures)]
        first.partial = ordered
        logger.error(f"Decay fit aborted: {len(failures)} samples failed; first: {first}")
        raise first

    warnings: List[str] = []
    kept: List[DecaySample] = []
    for sample in ordered:
        if sample.abs_J <= floor:
            warnings.append(f"|J| below floor {floor:.3e} at direction {sample.dir_index}, "
                            f"|xi| = {sample.abs_xi:g}; sample dropped")
            logger.warning(warnings[-1])
        else:
            kept.append(sample)

    slopes: List[DirectionSlope] = []
    for d, direction in enumerate(directions):
        mine = [s for s in kept if s.dir_index == d]
        if len(mine) < MIN_FIT_SAMPLES:
            note = f"Direction {d} keeps {len(mine)} samples; reported as rapidly decaying"
            warnings.append(note)
            logger.warning(note)
            slopes.append(DirectionSlope(d, tuple(direction.tolist()), -math.inf, math.nan,
                                         math.nan, len(mine), rapid_decay=True))
            continue
        slope, intercept, stderr = fit_loglog([s.abs_xi for s in mine], [s.abs_J for s in mine])
        slopes.append(DirectionSlope(d, tuple(direction.tolist()), slope, intercept, stderr, len(mine)))

    fitted = [s for s in slopes if not s.rapid_decay]
    if not fitted:
        raise ValueError("Every direction decayed below the floor; no exponent can be fitted")
    worst = max(fitted, key=lambda s: (s.slope, -s.index))
    logger.info(f"Decay fit: worst direction {worst.index}, slope {worst.slope:.4f} +- {worst.stderr:.4f}")
    return DecayFit(
        samples=kept,
        directions=[tuple(d.tolist()) for d in directions],
        magnitudes=[float(m) for m in magnitudes],
        slopes=slopes,
        fitted_exponent=-worst.slope,
        fit_stderr=worst.stderr,
        worst_direction=worst.index,
        dropped=len(ordered) - len(kept),
        warnings=warnings,
    )
