"""
Knapp scans of the restriction inequality

For a scale delta the test function has f_hat(xi) = prod_j g(xi_j / w_j) with
widths w = (delta^a_1, ..., delta^a_n, c delta), the a_i being the weights of
the principal face. Then
    lhs^2 = prod_{i<=n} w_i int_{[-1,1]^n} prod g(y_i)^2 g(phi(w y)/(c delta))^2 psi W dy
    rhs   = prod_j w_j^(1-1/p) ||g_check||_p^(n+1)
and log(lhs/rhs) against log(delta) has slope 1/(2d) - (1 + 1/d)(1 - 1/p).
"""

import logging
import math
import threading
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from newton import DistanceResult
from oscint import ConvergenceError, SurfacePatch, composite_gauss_legendre, fit_loglog
from polyalg import Polynomial, evaluate
from tool.schema import format_rational, format_real, parse_rational

from .profile import PlancherelCheck, ProfileNorms, default_norms, profile, width_factor

logger = logging.getLogger(__name__)

DEFAULT_CAP_CONSTANT = 0.125
DEFAULT_SCALES = tuple(2.0 ** -k for k in range(4, 12))
VERDICT_THRESHOLD = 0.02
SLOPE_AGREEMENT = 0.1
MIN_SAMPLES = 4
MIN_SCALES = 6
MIN_OCTAVES = 4
LHS_PANELS = 16
LHS_REL_TOL = 1e-4
MAX_DOUBLINGS = 2
DEGENERATE_WEIGHT_FACTOR = 4
BOUND_GRID = 9
CSV_COLUMNS = ['delta', 'lhs', 'rhs', 'ratio', 'predicted_exponent']

Rational = Union[Fraction, int, float, str]


class InsufficientSamplesError(RuntimeError):
    """Fewer than four usable scales remained for the slope fit"""

    def __init__(self, kept: int, required: int = MIN_SAMPLES):
        self.kept = kept
        self.required = required
        super().__init__(f"Only {kept} valid Knapp samples remain, need {required}")


# ============================================================================
# EXPONENTS
# ============================================================================

def predicted_exponent(d: Rational, p: Rational) -> Fraction:
    """1/(2d) - (1 + 1/d)(1 - 1/p), exact"""
    d, p = parse_rational(d), parse_rational(p)
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    return 1 / (2 * d) - (1 + 1 / d) * (1 - 1 / p)


def crossing_p(d: Rational) -> Fraction:
    """The p at which predicted_exponent(d, p) vanishes: 2(d+1)/(2d+1)"""
    d = parse_rational(d)
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    return 2 * (d + 1) / (2 * d + 1)


def classify_slope(slope: float, threshold: float = VERDICT_THRESHOLD) -> str:
    if slope < -threshold:
        return 'divergent'
    if slope > threshold:
        return 'bounded'
    return 'critical'


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class KnappFamily:
    """Anisotropic frequency boxes adapted to the principal face"""
    weights: Tuple[Fraction, ...]
    scales: Tuple[float, ...]
    cap_constant: float
    d: Fraction
    phi_bound: float = math.nan
    replaced: Tuple[int, ...] = ()

    def widths(self, delta: float) -> Tuple[float, ...]:
        """Half-widths (delta^a_1, ..., delta^a_n, c delta)"""
        return tuple(delta ** float(a) for a in self.weights) + (self.cap_constant * delta,)

    def to_dict(self) -> dict:
        return {
            'weights': [format_rational(a) for a in self.weights],
            'weight_sum': format_rational(sum(self.weights)),
            'scales': [format_real(s) for s in self.scales],
            'cap_constant': format_real(self.cap_constant),
            'd': format_rational(self.d),
            'phi_bound': format_real(self.phi_bound),
            'replaced': list(self.replaced),
        }


@dataclass(frozen=True)
class RestrictionSample:
    """One scale of a Knapp scan; ratio is the empirical A_{p,2} witness"""
    delta: float
    lhs: float
    rhs: float
    ratio: float
    predicted_exponent: float
    panels: int = 0

    def to_row(self) -> list:
        return [self.delta, self.lhs, self.rhs, self.ratio, self.predicted_exponent]

    def to_dict(self) -> dict:
        return dict(zip(CSV_COLUMNS, (format_real(v) for v in self.to_row())))


@dataclass
class KnappReport:
    """Slope of log(lhs/rhs) against log(delta) at one exponent p"""
    p: Fraction
    fitted_slope: float
    predicted_slope: Fraction
    verdict: str
    samples: List[RestrictionSample]
    fit_stderr: float = math.nan
    crossing_p: Optional[Fraction] = None
    crossing_matches_p_star: Optional[bool] = None
    plancherel: Optional[PlancherelCheck] = None
    dropped: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        """Fitted slope within 0.1 of the predicted exponent"""
        return abs(self.fitted_slope - float(self.predicted_slope)) <= SLOPE_AGREEMENT

    def rows(self) -> List[list]:
        return [s.to_row() for s in self.samples]

    def to_dict(self) -> dict:
        return {
            'p': format_rational(self.p),
            'fitted_slope': format_real(self.fitted_slope),
            'fit_stderr': format_real(self.fit_stderr),
            'predicted_slope': format_real(float(self.predicted_slope)),
            'predicted_slope_exact': format_rational(self.predicted_slope),
            'verdict': self.verdict,
            'agrees': self.agrees,
            'crossing_p': None if self.crossing_p is None else format_rational(self.crossing_p),
            'crossing_matches_p_star': self.crossing_matches_p_star,
            'plancherel': None if self.plancherel is None else self.plancherel.to_dict(),
            'samples': [s.to_dict() for s in self.samples],
            'dropped': self.dropped,
            'warnings': list(self.warnings),
        }


# ============================================================================
# FAMILY
# ============================================================================

def check_scales(scales: Sequence[float]) -> Tuple[float, ...]:
    """Sorted descending; at least 6 scales in (0, 1] spanning 4 octaves"""
    scales = tuple(sorted((float(s) for s in scales), reverse=True))
    if len(scales) < MIN_SCALES:
        raise ValueError(f"Knapp scans need at least {MIN_SCALES} scales, got {len(scales)}")
    if scales[-1] <= 0 or scales[0] > 1:
        raise ValueError(f"Scales must lie in (0, 1], got [{scales[-1]}, {scales[0]}]")
    if scales[0] < 2 ** MIN_OCTAVES * scales[-1]:
        raise ValueError(f"Scales must span at least {MIN_OCTAVES} octaves")
    return scales


def geometric_scales(delta_min: float, delta_max: float, count: int) -> Tuple[float, ...]:
    return check_scales(np.geomspace(delta_max, delta_min, count).tolist())


def knapp_family(np_distance: DistanceResult, scales: Sequence[float] = DEFAULT_SCALES,
                 c: float = DEFAULT_CAP_CONSTANT, phi: Optional[Polynomial] = None) -> KnappFamily:
    """
    Build the test family from the principal face

    Args:
        np_distance: Distance result; its attaining normal is normalized so the
            support minimum of <a, k> is 1, hence sum(a) = 1/d
        scales: Scales delta
        c: Cap constant for the normal frequency width
        phi: When given, |phi| <= C delta on every scaled box is sampled and C reported

    Returns:
        KnappFamily; zero weights are replaced by 4 * max(a) with a warning
    """
    if not c > 0:
        raise ValueError(f"cap constant must be positive, got {c}")
    scales = check_scales(scales)
    weights = [Fraction(a) for a in np_distance.attaining_normal]
    if any(a < 0 for a in weights):
        raise ValueError(f"Principal face normal has a negative component: {weights}")
    replaced = tuple(i for i, a in enumerate(weights) if a == 0)
    if replaced:
        large = DEGENERATE_WEIGHT_FACTOR * max(weights)
        logger.warning(f"Degenerate principal face: weights {[str(a) for a in weights]} have zero "
                       f"components at {list(replaced)}; replacing them by {large}")
        weights = [large if a == 0 else a for a in weights]

    phi_bound = math.nan
    if phi is not None:
        phi_bound = _sample_phi_bound(phi, weights, scales)
        logger.info(f"Knapp family: |phi| <= {phi_bound:.4g} delta on the scaled boxes")
    return KnappFamily(tuple(weights), scales, float(c), np_distance.d, phi_bound, replaced)


def _sample_phi_bound(phi: Polynomial, weights: Sequence[Fraction], scales: Sequence[float]) -> float:
    axis = np.linspace(-1.0, 1.0, BOUND_GRID)
    mesh = np.meshgrid(*([axis] * phi.nvars), indexing='ij')
    grid = np.stack([m.ravel() for m in mesh], axis=-1)
    bound = 0.0
    for delta in scales:
        widths = np.array([delta ** float(a) for a in weights])
        bound = max(bound, float(np.max(np.abs(evaluate(phi, grid * widths)))) / delta)
    return bound


# ============================================================================
# SAMPLES
# ============================================================================

class KnappEvaluator:
    """Restriction quotients for one surface and family; lhs is cached per scale"""

    def __init__(self, sp: SurfacePatch, fam: KnappFamily, norms: Optional[ProfileNorms] = None,
                 panels: int = LHS_PANELS, rel_tol: float = LHS_REL_TOL,
                 max_doublings: int = MAX_DOUBLINGS):
        if len(fam.weights) != sp.nvars:
            raise ValueError(f"Family has {len(fam.weights)} weights, surface has {sp.nvars} variables")
        self.patch = sp
        self.family = fam
        self.norms = norms or default_norms()
        self.panels = panels
        self.rel_tol = rel_tol
        self.max_doublings = max_doublings
        self._lhs: Dict[float, Tuple[float, int]] = {}
        self._lock = threading.Lock()

    def _integral(self, delta: float, panels: int) -> float:
        widths = self.family.widths(delta)
        tangential = np.array(widths[:-1])
        normal = widths[-1]
        n = self.patch.nvars
        nodes, weights = composite_gauss_legendre(-1.0, 1.0, panels)
        g_squared = profile(nodes) ** 2
        if n == 1:
            rest, rest_weights = np.zeros((1, 0)), np.ones(1)
        else:
            mesh = np.meshgrid(*([nodes] * (n - 1)), indexing='ij')
            wmesh = np.meshgrid(*([weights * g_squared] * (n - 1)), indexing='ij')
            rest = np.stack([m.ravel() for m in mesh], axis=-1)
            rest_weights = np.prod(np.stack([w.ravel() for w in wmesh], axis=-1), axis=-1)

        total = 0.0
        for y1, w1, g1 in zip(nodes, weights, g_squared):
            if g1 == 0.0:
                continue
            y = np.empty((rest.shape[0], n))
            y[:, 0] = y1
            y[:, 1:] = rest
            x = y * tangential
            cap = profile(self.patch.height(x) / normal) ** 2
            total += w1 * g1 * float(np.sum(rest_weights * cap * self.patch.weight(x)))
        return float(np.prod(tangential)) * total

    def lhs(self, delta: float) -> Tuple[float, int]:
        """||f_hat||_{L2(S, dmu)} and the panel count it converged at"""
        with self._lock:
            if delta in self._lhs:
                return self._lhs[delta]
        panels = self.panels
        coarse = self._integral(delta, panels)
        for _ in range(self.max_doublings + 1):
            fine = self._integral(delta, 2 * panels)
            panels *= 2
            if abs(fine - coarse) <= self.rel_tol * abs(fine):
                break
            coarse = fine
        else:
            raise ConvergenceError(coarse, fine, panels)
        value = (math.sqrt(fine) if fine > 0 else 0.0, panels)
        with self._lock:
            self._lhs[delta] = value
        return value

    def rhs(self, delta: float, p: Rational) -> float:
        """||f||_p as a product of one-dimensional norms"""
        p = parse_rational(p)
        widths = self.family.widths(delta)
        return width_factor(widths, float(p)) * self.norms.lp_norm(float(p)) ** len(widths)

    def sample(self, delta: float, p: Rational) -> RestrictionSample:
        p = parse_rational(p)
        lhs, panels = self.lhs(delta)
        rhs = self.rhs(delta, p)
        ratio = lhs / rhs if rhs > 0 else math.nan
        return RestrictionSample(delta, lhs, rhs, ratio, float(predicted_exponent(self.family.d, p)), panels)


def _check_p(p: Fraction):
    if not 1 < p <= 2:
        raise ValueError(f"Knapp samples need 1 < p <= 2, got {p}")


def restriction_sample(sp: SurfacePatch, fam: KnappFamily, delta: float, p: Rational) -> RestrictionSample:
    """
    Restriction quotient of the Knapp test function at scale delta

    Raises:
        ValueError: If p is outside (1, 2] or delta is not one of the family scales
        ConvergenceError: If the cap quadrature does not settle
    """
    p = parse_rational(p)
    _check_p(p)
    if not any(math.isclose(delta, s, rel_tol=1e-12) for s in fam.scales):
        raise ValueError(f"delta = {delta} is not a scale of the family")
    return KnappEvaluator(sp, fam).sample(delta, p)


def knapp_scan(sp: SurfacePatch, fam: KnappFamily, p: Rational, p_star: Optional[Rational] = None,
               workers: int = 1, threshold: float = VERDICT_THRESHOLD,
               evaluator: Optional[KnappEvaluator] = None) -> KnappReport:
    """
    Fit log(ratio) against log(delta) over the family scales

    Args:
        sp: Surface patch
        fam: Knapp family
        p: Exponent in (1, 2]
        p_star: Critical exponent from the height, compared with the exact crossing
        workers: Thread pool size; the result does not depend on it
        threshold: Verdict threshold on the fitted slope
        evaluator: Shared evaluator so several p reuse the cached lhs values

    Returns:
        KnappReport

    Raises:
        InsufficientSamplesError: If fewer than four samples survive
    """
    p = parse_rational(p)
    _check_p(p)
    evaluator = evaluator or KnappEvaluator(sp, fam)
    plancherel = evaluator.norms.plancherel_check()

    samples: Dict[int, RestrictionSample] = {}
    with ThreadPoolExecutor(max_workers=max(1, workers)) as executor:
        future_to_index = {
            executor.submit(evaluator.sample, delta, p): k for k, delta in enumerate(fam.scales)
        }
        for future in as_completed(future_to_index):
            samples[future_to_index[future]] = future.result()

    warnings: List[str] = []
    kept: List[RestrictionSample] = []
    for k in sorted(samples):
        sample = samples[k]
        if sample.lhs > 0 and sample.rhs > 0 and math.isfinite(sample.ratio) and sample.ratio > 0:
            kept.append(sample)
        else:
            warnings.append(f"Sample at delta = {sample.delta:g} underflowed and was dropped")
            logger.warning(warnings[-1])
    if len(kept) < MIN_SAMPLES:
        raise InsufficientSamplesError(len(kept))

    slope, _, stderr = fit_loglog([s.delta for s in kept], [s.ratio for s in kept])
    predicted = predicted_exponent(fam.d, p)
    crossing = crossing_p(fam.d)
    matches = None if p_star is None else crossing == parse_rational(p_star)
    report = KnappReport(
        p=p,
        fitted_slope=slope,
        predicted_slope=predicted,
        verdict=classify_slope(slope, threshold),
        samples=kept,
        fit_stderr=stderr,
        crossing_p=crossing,
        crossing_matches_p_star=matches,
        plancherel=plancherel,
        dropped=len(samples) - len(kept),
        warnings=warnings,
    )
    logger.info(f"Knapp scan p = {p}: slope {slope:.4f} (predicted {float(predicted):.4f}) -> {report.verdict}")
    if not report.agrees:
        logger.warning(f"Knapp slope {slope:.4f} differs from the predicted {float(predicted):.4f} by more than "
                       f"{SLOPE_AGREEMENT}")
    return report
