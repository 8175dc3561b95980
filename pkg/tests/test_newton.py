from fractions import Fraction

import hypothesis.strategies as st
import pytest
from hypothesis import assume, given, settings

from newton import (
    EmptySupportError,
    SupportSet,
    build_polyhedron,
    distance,
    distance_oracle,
    newton_distance,
    support,
)
from polyalg import parse

points = st.tuples(*[st.integers(min_value=0, max_value=8)] * 3).filter(any)
supports = st.lists(points, min_size=1, max_size=10, unique=True).map(SupportSet.from_points)


def newton_of(text):
    return distance(build_polyhedron(support(parse(text))))


# ============================================================================
# SUPPORT
# ============================================================================

def test_support_drops_origin_and_zero_terms():
    s = support(parse("3 + x1^2 + x2 - x2 + x3^4"))
    assert s.points == ((0, 0, 4), (2, 0, 0))


def test_empty_support():
    with pytest.raises(EmptySupportError):
        support(parse("5"))
    with pytest.raises(EmptySupportError):
        support(parse("x1 - x1"))
    with pytest.raises(EmptySupportError):
        SupportSet.from_points([])
    with pytest.raises(ValueError):
        SupportSet.from_points([(0, 0, 0)])


def test_minimal_points():
    s = SupportSet.from_points([(2, 0, 0), (3, 1, 0), (0, 0, 2), (1, 1, 1)])
    assert sorted(s.minimal_points()) == [(0, 0, 2), (1, 1, 1), (2, 0, 0)]


# ============================================================================
# DISTANCE AND PRINCIPAL FACE
# ============================================================================

@pytest.mark.parametrize("text, d", [
    ("x1^2 + x2^2 + x3^2", Fraction(2, 3)),
    ("x1^2 + x2^2 + x3^4", Fraction(4, 5)),
    ("x1^2 + x2^4 + x3^4", Fraction(1)),
    ("x1^4 + x2^4 + x3^4", Fraction(4, 3)),
    ("x1^2 + x2^3 + x3^6", Fraction(1)),
    ("x1*x2 + x3^2", Fraction(2, 3)),
    ("x1^2*x2^2*x3^2", Fraction(2)),
])
def test_newton_distance_examples(text, d):
    assert newton_of(text).d == d


def test_principal_face_of_sphere_like_graph():
    result = newton_of("x1^2 + x2^2 + x3^2")
    assert result.principal_face_dim == 2
    assert sorted(result.principal_face_vertices) == [(0, 0, 2), (0, 2, 0), (2, 0, 0)]
    assert result.attaining_normal == (Fraction(1, 2),) * 3
    assert result.compact_principal_facet


def test_principal_face_weights_follow_the_facet():
    result = newton_of("x1^2 + x2^2 + x3^4")
    assert result.attaining_normal == (Fraction(1, 2), Fraction(1, 2), Fraction(1, 4))
    assert sum(a * c for a, c in zip(result.attaining_normal, result.diagonal_point)) == 1


def test_edge_principal_face():
    result = newton_of("x1*x2 + x3^2")
    assert result.principal_face_dim == 1
    assert sorted(result.principal_face_vertices) == [(0, 0, 2), (1, 1, 0)]
    assert {f.normal for f in result.active_facets} == {(2, 0, 1), (0, 2, 1)}
    assert result.attaining_normal == (Fraction(1, 2),) * 3
    assert not result.compact_principal_facet


def test_vertex_principal_face():
    result = newton_of("x1^2*x2^2*x3^2")
    assert result.principal_face_dim == 0
    assert result.principal_face_vertices == ((2, 2, 2),)


def test_polyhedron_facets_and_membership():
    polyhedron = build_polyhedron(support(parse("x1^2 + x2^2 + x3^4")))
    normals = {(f.normal, f.offset) for f in polyhedron.facets}
    assert ((2, 2, 1), 4) in normals
    assert polyhedron.contains((Fraction(4, 5),) * 3)
    assert not polyhedron.contains((Fraction(3, 4),) * 3)
    assert sorted(polyhedron.vertices) == [(0, 0, 4), (0, 2, 0), (2, 0, 0)]


def test_distance_to_dict_is_exact():
    data = newton_of("x1^2 + x2^2 + x3^4").to_dict()
    assert data['distance'] == "4/5"
    assert data['attaining_normal'] == ["1/2", "1/2", "1/4"]


# ============================================================================
# PROPERTIES
# ============================================================================

@given(supports)
@settings(max_examples=200, deadline=None)
def test_facet_distance_matches_oracle(s):
    assert newton_distance(s) == distance_oracle(s)


@given(supports, st.permutations([0, 1, 2]))
@settings(max_examples=50, deadline=None)
def test_distance_is_permutation_invariant(s, order):
    assert newton_distance(s.permuted(order)) == newton_distance(s)


@given(supports, points)
@settings(max_examples=50, deadline=None)
def test_adding_points_never_increases_distance(s, extra):
    assert newton_distance(s.with_point(extra)) <= newton_distance(s)


@given(st.integers(1, 8), st.integers(1, 8), st.integers(1, 8))
def test_distance_of_pure_powers(a, b, c):
    s = SupportSet.from_points([(a, 0, 0), (0, b, 0), (0, 0, c)])
    assert newton_distance(s) == 1 / (Fraction(1, a) + Fraction(1, b) + Fraction(1, c))


@given(supports)
@settings(max_examples=150, deadline=None)
def test_facets_bound_the_support(s):
    polyhedron = build_polyhedron(s)
    assert polyhedron.facets
    for facet in polyhedron.facets:
        assert all(c >= 0 for c in facet.normal)
        assert all(facet.satisfied_by(k) for k in s.points)
        assert any(facet.is_tight(k) for k in s.points)


@given(supports)
@settings(max_examples=150, deadline=None)
def test_some_facet_is_tight_on_the_diagonal(s):
    polyhedron = build_polyhedron(s)
    d = distance(polyhedron).d
    diagonal = (d,) * s.nvars
    assert polyhedron.contains(diagonal)
    assert any(f.is_tight(diagonal) for f in polyhedron.facets)


@given(supports, points)
@settings(max_examples=150, deadline=None)
def test_points_inside_leave_the_polyhedron_unchanged(s, extra):
    polyhedron = build_polyhedron(s)
    assume(extra not in s.points and polyhedron.contains(extra))
    grown = build_polyhedron(s.with_point(extra))
    assert grown.vertices == polyhedron.vertices
    assert grown.facets == polyhedron.facets


@given(supports, st.integers(min_value=0, max_value=2), st.integers(min_value=1, max_value=3))
@settings(max_examples=50, deadline=None)
def test_dominated_points_leave_the_polyhedron_unchanged(s, axis, shift):
    vertex = s.minimal_points()[0]
    extra = tuple(c + (shift if i == axis else 1) for i, c in enumerate(vertex))
    assume(extra not in s.points)
    grown = build_polyhedron(s.with_point(extra))
    assert grown.vertices == build_polyhedron(s).vertices
    assert grown.facets == build_polyhedron(s).facets
