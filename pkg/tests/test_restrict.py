import math
from dataclasses import dataclass
from fractions import Fraction

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings

from newton import build_polyhedron, distance, support
from oscint import SurfacePatch
from polyalg import parse
from restrict import (
    DEFAULT_SCALES,
    InsufficientSamplesError,
    KnappEvaluator,
    classify_slope,
    crossing_p,
    default_norms,
    geometric_scales,
    knapp_family,
    knapp_scan,
    plancherel_check,
    predicted_exponent,
    profile,
    restriction_sample,
    width_factor,
)
from restrict.knapp import check_scales

distances = st.fractions(min_value=Fraction(1, 20), max_value=10)
exponents = st.fractions(min_value=Fraction(11, 10), max_value=2)

PARABOLOID = parse("x1^2 + x2^2 + x3^2")
QUARTIC = parse("x1^2 + x2^2 + x3^4")


def distance_of(phi):
    return distance(build_polyhedron(support(phi)))


@pytest.fixture(scope="module")
def paraboloid_family():
    return knapp_family(distance_of(PARABOLOID))


class PowerLawEvaluator(KnappEvaluator):
    """lhs = delta^(1/(2d)) exactly, as for a perfectly homogeneous cap"""

    def lhs(self, delta):
        return delta ** (1.0 / (2.0 * float(self.family.d))), 0


@dataclass(frozen=True)
class HollowPatch(SurfacePatch):
    """Cutoff vanishing near the origin, so every Knapp cap carries no mass"""

    def bump_values(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(np.sum(x * x, axis=-1) < 0.3 ** 2, 0.0, super().bump_values(x))


# ============================================================================
# EXPONENTS
# ============================================================================

def test_paraboloid_crossing_is_tomas_stein():
    assert crossing_p(Fraction(2, 3)) == Fraction(10, 7)
    assert predicted_exponent(Fraction(2, 3), Fraction(10, 7)) == 0
    assert predicted_exponent(Fraction(2, 3), 2) == Fraction(3, 4) - Fraction(5, 4)


@given(distances)
@settings(max_examples=20)
def test_crossing_p_is_exact(d):
    p = crossing_p(d)
    assert predicted_exponent(d, p) == 0
    assert 1 < p < 2


@given(distances, exponents, exponents)
@settings(max_examples=50)
def test_predicted_exponent_decreases_in_p(d, p, q):
    if p < q:
        assert predicted_exponent(d, p) > predicted_exponent(d, q)


def test_exponent_validation():
    with pytest.raises(ValueError):
        crossing_p(0)
    with pytest.raises(ValueError):
        predicted_exponent(Fraction(2, 3), 0)


def test_classify_slope():
    assert classify_slope(0.5) == 'bounded'
    assert classify_slope(-0.5) == 'divergent'
    assert classify_slope(0.01) == 'critical'
    assert classify_slope(-0.02) == 'critical'
    assert classify_slope(0.03, threshold=0.05) == 'critical'


# ============================================================================
# PROFILE
# ============================================================================

def test_profile_shape():
    s = np.array([-1.5, -1.0, -0.5, 0.0, 0.5, 1.0])
    values = profile(s)
    assert values[3] == 1.0
    assert values[0] == values[1] == values[5] == 0.0
    assert values[2] == values[4] == pytest.approx(math.exp(1.0 - 1.0 / 0.75))


def test_plancherel():
    check = plancherel_check()
    assert check.passed
    assert check.rel_error < 1e-6
    assert check.to_dict()['pass'] is True


def test_inverse_transform_at_zero():
    norms = default_norms()
    expected = float(np.sum(norms.s_weights * profile(norms.s_nodes))) / math.sqrt(2 * math.pi)
    assert norms.inverse_transform(0.0)[0] == pytest.approx(expected)
    assert norms.inverse_transform([-3.0])[0] == pytest.approx(norms.inverse_transform([3.0])[0])


def test_lp_norms_are_cached_and_validated():
    norms = default_norms()
    first = norms.lp_norm(1.5)
    assert norms.lp_norm(1.5) == first
    assert first > 0
    with pytest.raises(ValueError):
        norms.lp_norm(0.5)


def test_width_factor():
    assert width_factor((0.25, 0.25), 2.0) == pytest.approx(0.25)
    assert width_factor((0.5, 0.5, 0.5), 1.0) == 1.0


# ============================================================================
# FAMILY
# ============================================================================

def test_paraboloid_family(paraboloid_family):
    assert paraboloid_family.weights == (Fraction(1, 2),) * 3
    assert paraboloid_family.d == Fraction(2, 3)
    assert paraboloid_family.scales == DEFAULT_SCALES
    widths = paraboloid_family.widths(1 / 16)
    assert widths == pytest.approx((0.25, 0.25, 0.25, 0.125 / 16))


def test_family_samples_the_phi_bound():
    family = knapp_family(distance_of(PARABOLOID), phi=PARABOLOID)
    assert family.phi_bound == pytest.approx(3.0)


def test_family_replaces_zero_weights():
    family = knapp_family(distance_of(parse("x1^2 + x2^2")))
    assert family.replaced == (2,)
    assert family.weights == (Fraction(1, 2), Fraction(1, 2), Fraction(2))
    assert family.to_dict()['replaced'] == [2]


def test_scale_validation():
    with pytest.raises(ValueError):
        check_scales([0.5, 0.25, 0.125])
    with pytest.raises(ValueError):
        check_scales(np.geomspace(0.5, 0.1, 8))
    with pytest.raises(ValueError):
        check_scales(np.geomspace(2.0, 0.01, 8))
    with pytest.raises(ValueError):
        knapp_family(distance_of(PARABOLOID), c=0.0)
    assert geometric_scales(2.0 ** -11, 2.0 ** -4, 8) == pytest.approx(DEFAULT_SCALES)


# ============================================================================
# SCANS
# ============================================================================

@pytest.mark.parametrize("offset, verdict", [
    (Fraction(-1, 10), 'bounded'),
    (Fraction(0), 'critical'),
    (Fraction(1, 10), 'divergent'),
])
def test_scan_verdicts_for_homogeneous_caps(paraboloid_family, offset, verdict):
    patch = SurfacePatch(PARABOLOID)
    evaluator = PowerLawEvaluator(patch, paraboloid_family)
    p = Fraction(10, 7) + offset
    report = knapp_scan(patch, paraboloid_family, p, p_star=Fraction(10, 7), evaluator=evaluator)
    assert report.verdict == verdict
    assert report.fitted_slope == pytest.approx(float(report.predicted_slope), abs=1e-9)
    assert report.agrees
    assert report.crossing_matches_p_star
    assert report.plancherel.passed
    assert len(report.rows()) == len(DEFAULT_SCALES)


def test_scan_slopes_shift_exactly_with_p(paraboloid_family):
    patch = SurfacePatch(PARABOLOID)
    evaluator = PowerLawEvaluator(patch, paraboloid_family)
    low = knapp_scan(patch, paraboloid_family, Fraction(5, 4), evaluator=evaluator)
    high = knapp_scan(patch, paraboloid_family, Fraction(3, 2), evaluator=evaluator)
    expected = float((1 + 1 / paraboloid_family.d) * (Fraction(4, 5) - Fraction(2, 3)))
    assert low.fitted_slope - high.fitted_slope == pytest.approx(expected, abs=1e-9)
    assert low.crossing_matches_p_star is None


def test_scan_is_independent_of_workers(paraboloid_family):
    patch = SurfacePatch(PARABOLOID)
    serial = knapp_scan(patch, paraboloid_family, Fraction(10, 7),
                        evaluator=PowerLawEvaluator(patch, paraboloid_family), workers=1)
    threaded = knapp_scan(patch, paraboloid_family, Fraction(10, 7),
                          evaluator=PowerLawEvaluator(patch, paraboloid_family), workers=4)
    assert serial.to_dict() == threaded.to_dict()


def test_cap_without_mass_leaves_too_few_samples(paraboloid_family):
    patch = HollowPatch(PARABOLOID)
    evaluator = KnappEvaluator(patch, paraboloid_family, panels=2)
    assert evaluator.lhs(DEFAULT_SCALES[0])[0] == 0.0
    with pytest.raises(InsufficientSamplesError) as info:
        knapp_scan(patch, paraboloid_family, Fraction(10, 7), evaluator=evaluator)
    assert info.value.kept == 0


def test_sample_validation(paraboloid_family):
    patch = SurfacePatch(PARABOLOID)
    with pytest.raises(ValueError):
        restriction_sample(patch, paraboloid_family, DEFAULT_SCALES[0], 1)
    with pytest.raises(ValueError):
        restriction_sample(patch, paraboloid_family, DEFAULT_SCALES[0], Fraction(5, 2))
    with pytest.raises(ValueError):
        restriction_sample(patch, paraboloid_family, 0.3, Fraction(10, 7))
    with pytest.raises(ValueError):
        KnappEvaluator(SurfacePatch(parse("x1^2 + x2^2", nvars=2)), paraboloid_family)


def test_rhs_is_an_exact_power_of_delta(paraboloid_family):
    evaluator = KnappEvaluator(SurfacePatch(PARABOLOID), paraboloid_family)
    p = Fraction(3, 2)
    ratio = evaluator.rhs(2.0 ** -6, p) / evaluator.rhs(2.0 ** -5, p)
    exponent = (1 + 1 / paraboloid_family.d) * (1 - 1 / p)
    assert ratio == pytest.approx(0.5 ** float(exponent), rel=1e-12)


@pytest.mark.slow
def test_paraboloid_knapp_bracket(paraboloid_family):
    patch = SurfacePatch(PARABOLOID)
    evaluator = KnappEvaluator(patch, paraboloid_family)
    p_star = Fraction(10, 7)
    verdicts = []
    for p in (p_star - Fraction(1, 10), p_star, p_star + Fraction(1, 10)):
        report = knapp_scan(patch, paraboloid_family, p, p_star=p_star, workers=4, evaluator=evaluator)
        assert report.agrees
        verdicts.append(report.verdict)
    assert verdicts == ['bounded', 'critical', 'divergent']


@pytest.mark.slow
def test_quartic_knapp_bracket():
    family = knapp_family(distance_of(QUARTIC))
    assert family.weights == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 4))
    patch = SurfacePatch(QUARTIC)
    evaluator = KnappEvaluator(patch, family)
    p_star = Fraction(18, 13)
    assert crossing_p(family.d) == p_star
    verdicts = []
    for p in (p_star - Fraction(1, 10), p_star, p_star + Fraction(1, 10)):
        report = knapp_scan(patch, family, p, p_star=p_star, workers=4, evaluator=evaluator)
        assert report.agrees
        assert report.crossing_matches_p_star
        verdicts.append(report.verdict)
    assert verdicts == ['bounded', 'critical', 'divergent']


@pytest.mark.slow
def test_restriction_sample_lhs_scales_like_the_face(paraboloid_family):
    patch = SurfacePatch(PARABOLOID)
    coarse = restriction_sample(patch, paraboloid_family, DEFAULT_SCALES[2], Fraction(10, 7))
    fine = restriction_sample(patch, paraboloid_family, DEFAULT_SCALES[6], Fraction(10, 7))
    slope = math.log(fine.lhs / coarse.lhs) / math.log(DEFAULT_SCALES[6] / DEFAULT_SCALES[2])
    assert slope == pytest.approx(0.75, abs=0.02)
