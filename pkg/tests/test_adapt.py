from fractions import Fraction

import hypothesis.strategies as st
import numpy as np
import pytest
from hypothesis import given, settings
from scipy.spatial.transform import Rotation

from adapt import (
    HeightSearch,
    critical_p,
    decay_rate,
    dual_exponent,
    greenleaf_p,
    height_search,
    tomas_stein_p,
)
from newton import EmptySupportError
from polyalg import LinearChange, compose_linear, parse

heights = st.fractions(min_value=Fraction(1, 50), max_value=20).filter(lambda h: h > 0)

QUARTIC = "x1^2 + x2^2 + x3^4"


# ============================================================================
# EXPONENTS
# ============================================================================

def test_paraboloid_exponents():
    report = critical_p(Fraction(2, 3))
    assert report.beta == Fraction(3, 2)
    assert report.p_star == Fraction(10, 7)
    assert report.q_star == Fraction(10, 3)
    assert report.q_lower == Fraction(10, 3)
    assert report.ambient_dim == 4
    assert report.matches_tomas_stein
    assert report.adapted


def test_quartic_exponents():
    report = critical_p(Fraction(4, 5))
    assert report.p_star == Fraction(18, 13)
    assert report.q_star == Fraction(18, 5)
    assert report.beta == Fraction(5, 4)
    assert not report.matches_tomas_stein


def test_codimension_two_is_not_the_sphere_threshold():
    report = critical_p(Fraction(2, 3), m=2)
    assert report.ambient_dim == 5
    assert tomas_stein_p(report.ambient_dim) == Fraction(3, 2)
    assert not report.matches_tomas_stein


def test_unadapted_coordinates_lower_q():
    report = critical_p(Fraction(4, 5), d=Fraction(2, 3))
    assert report.q_lower == Fraction(10, 3)
    assert not report.adapted


@given(heights)
@settings(max_examples=50)
def test_exponent_identities(h):
    report = critical_p(h)
    assert report.p_star == greenleaf_p(decay_rate(h))
    assert 1 / report.p_star + 1 / report.q_star == 1
    assert dual_exponent(report.p_star) == report.q_star
    assert 1 < report.p_star < 2
    assert report.q_lower == report.q_star


@given(heights, heights)
@settings(max_examples=50)
def test_p_star_decreases_with_height(a, b):
    if a < b:
        assert critical_p(a).p_star > critical_p(b).p_star


def test_tomas_stein_thresholds():
    assert tomas_stein_p(2) == Fraction(6, 5)
    assert tomas_stein_p(3) == Fraction(4, 3)
    assert tomas_stein_p(4) == Fraction(10, 7)


def test_exponent_validation():
    with pytest.raises(ValueError):
        critical_p(0)
    with pytest.raises(ValueError):
        critical_p(Fraction(-1, 2))
    with pytest.raises(ValueError):
        dual_exponent(1)
    with pytest.raises(ValueError):
        greenleaf_p(Fraction(1), m=0)


def test_exponent_report_to_dict():
    data = critical_p(Fraction(4, 5)).to_dict()
    assert data['p_star'] == "18/13"
    assert data['h'] == "4/5"
    assert data['matches_tomas_stein'] is False


# ============================================================================
# HEIGHT SEARCH
# ============================================================================

def test_height_of_paraboloid():
    result = height_search(parse("x1^2 + x2^2 + x3^2"), starts=4, iters=4, seed=0)
    assert result.h == Fraction(2, 3)
    assert result.d_original == Fraction(2, 3)
    assert result.certified
    assert result.maximizer.is_rotation


def test_height_of_adapted_quartic():
    result = height_search(parse(QUARTIC), starts=4, iters=4, seed=0)
    assert result.h == Fraction(4, 5)
    assert result.d_original == Fraction(4, 5)
    assert result.certified


def test_height_recovers_rotated_quartic():
    rotation = LinearChange.from_array(Rotation.from_rotvec([0.3, -0.7, 0.5]).as_matrix())
    rotated = compose_linear(parse(QUARTIC), rotation)
    result = height_search(rotated, starts=8, iters=10, seed=1)
    assert result.d_original == Fraction(2, 3)
    assert result.h == Fraction(4, 5)
    assert result.h >= result.d_original


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("text, h", [
    ("x1^2 + x2^2 + x3^2", Fraction(2, 3)),
    (QUARTIC, Fraction(4, 5)),
    ("x1*x2 + x3^2", Fraction(2, 3)),
])
def test_height_is_rotation_invariant(text, h, seed):
    rotation = LinearChange.from_array(Rotation.random(random_state=seed).as_matrix())
    rotated = compose_linear(parse(text), rotation)
    result = height_search(rotated, starts=8, iters=10, seed=seed, workers=4)
    assert result.h == h
    assert result.d_original <= result.h


def test_height_reports_uncertified_edge_face():
    result = height_search(parse("x1*x2 + x3^2"), starts=4, iters=4, seed=0)
    assert result.h == Fraction(2, 3)
    assert not result.certified
    assert result.distance.principal_face_dim == 1


def test_height_search_is_deterministic_across_workers():
    phi = parse(QUARTIC)
    serial = height_search(phi, starts=6, iters=3, seed=7, workers=1)
    threaded = height_search(phi, starts=6, iters=3, seed=7, workers=4)
    assert serial.h == threaded.h
    assert serial.trace == threaded.trace
    assert serial.maximizer == threaded.maximizer


def test_height_trace_covers_every_start():
    search = HeightSearch(parse(QUARTIC))
    result = search.run(starts=3, iters=0, seed=0)
    assert len(result.trace) == len(search.seed_rotations()) + 3
    assert max(d for _, d in result.trace) == result.h


def test_seed_rotations_include_hessian_frame():
    rotations = HeightSearch(parse("x1^2 + x2^2 + x3^2")).seed_rotations()
    assert rotations[0] == LinearChange.identity(3)
    assert all(r.is_rotation for r in rotations)


def test_height_search_validation():
    with pytest.raises(EmptySupportError):
        HeightSearch(parse("7"))
    with pytest.raises(ValueError):
        HeightSearch(parse("x1^2 + x2^2", nvars=2))
    with pytest.raises(ValueError):
        height_search(parse(QUARTIC), starts=0)


def test_height_drops_constant_term():
    result = height_search(parse("1 + x1^2 + x2^2 + x3^4"), starts=2, iters=2, seed=0)
    assert result.h == Fraction(4, 5)


def test_height_result_to_dict():
    data = height_search(parse(QUARTIC), starts=2, iters=1, seed=0).to_dict()
    assert data['h'] == "4/5"
    assert np.allclose(np.array(data['rotation']) @ np.array(data['rotation']).T, np.eye(3), atol=1e-9)
