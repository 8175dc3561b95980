"""
Newton polyhedron, Newton distance and principal face

The polyhedron conv(union of k + R_+^n over the support) is described by its
vertices and irredundant facet inequalities <a, x> >= c with primitive
integer normals a >= 0. All arithmetic is exact: facets are integer, the
distance is a Fraction.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import List, Optional, Sequence, Tuple

from tool.schema import format_rational

from .support import EmptySupportError, Point, SupportSet

logger = logging.getLogger(__name__)


# ============================================================================
# EXACT LINEAR ALGEBRA HELPERS
# ============================================================================

def integer_det(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant of a square integer matrix"""
    m = [list(row) for row in matrix]
    size = len(m)
    if size == 0:
        return 1
    sign, previous = 1, 1
    for k in range(size - 1):
        if m[k][k] == 0:
            swap = next((r for r in range(k + 1, size) if m[r][k] != 0), None)
            if swap is None:
                return 0
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, size):
            for j in range(k + 1, size):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // previous
        previous = m[k][k]
    return sign * m[size - 1][size - 1]


def primitive_normal(vectors: Sequence[Sequence[int]], n: int) -> Optional[Tuple[int, ...]]:
    """
    Primitive integer vector orthogonal to n-1 integer vectors

    Returns:
        Generalized cross product divided by its content, or None when the
        vectors are linearly dependent
    """
    components = []
    for skip in range(n):
        minor = [[v[j] for j in range(n) if j != skip] for v in vectors]
        components.append((-1) ** skip * integer_det(minor))
    content = 0
    for c in components:
        content = gcd(content, abs(c))
    if content == 0:
        return None
    return tuple(c // content for c in components)


def exact_rank(vectors: Sequence[Sequence[int]]) -> int:
    rows = [[Fraction(v) for v in vector] for vector in vectors]
    if not rows:
        return 0
    rank = 0
    for col in range(len(rows[0])):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col] / rows[rank][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


# ============================================================================
# DATA TYPES
# ============================================================================

@dataclass(frozen=True)
class Facet:
    """Inequality <normal, x> >= offset"""
    normal: Tuple[int, ...]
    offset: int

    def value(self, x: Sequence) -> Fraction:
        return dot(self.normal, x)

    def satisfied_by(self, x: Sequence) -> bool:
        return dot(self.normal, x) >= self.offset

    def is_tight(self, x: Sequence) -> bool:
        return dot(self.normal, x) == self.offset

    @property
    def is_compact(self) -> bool:
        """A facet is bounded exactly when its normal has no zero component"""
        return all(c > 0 for c in self.normal)

    def to_dict(self) -> dict:
        return {'normal': [format_rational(c) for c in self.normal], 'offset': format_rational(self.offset)}


@dataclass(frozen=True)
class NewtonPolyhedron:
    """Vertices and facets of conv(k + R_+^n : k in source)"""
    vertices: Tuple[Point, ...]
    facets: Tuple[Facet, ...]
    source: SupportSet

    @property
    def nvars(self) -> int:
        return self.source.nvars

    def contains(self, x: Sequence) -> bool:
        return all(f.satisfied_by(x) for f in self.facets)

    def to_dict(self) -> dict:
        return {
            'vertices': [list(v) for v in self.vertices],
            'facets': [f.to_dict() for f in self.facets],
        }


@dataclass(frozen=True)
class DistanceResult:
    """Newton distance d and the principal face through (d, ..., d)"""
    d: Fraction
    principal_face_dim: int
    principal_face_vertices: Tuple[Point, ...]
    attaining_normal: Tuple[Fraction, ...]
    attaining_offset: Fraction
    active_facets: Tuple[Facet, ...]

    @property
    def diagonal_point(self) -> Tuple[Fraction, ...]:
        return (self.d,) * len(self.attaining_normal)

    @property
    def compact_principal_facet(self) -> bool:
        """Principal face is a single compact facet crossed by the diagonal in its relative interior"""
        n = len(self.attaining_normal)
        return (self.principal_face_dim == n - 1
                and len(self.active_facets) == 1
                and self.active_facets[0].is_compact)

    def to_dict(self) -> dict:
        return {
            'distance': format_rational(self.d),
            'principal_face_dim': self.principal_face_dim,
            'principal_face_vertices': [list(v) for v in self.principal_face_vertices],
            'attaining_normal': [format_rational(c) for c in self.attaining_normal],
            'attaining_offset': format_rational(self.attaining_offset),
        }


# ============================================================================
# OPERATIONS
# ============================================================================

def build_polyhedron(s: SupportSet) -> NewtonPolyhedron:
    """
    Enumerate the facets of the Newton polyhedron of a support

    Candidate hyperplanes pass through m support points and contain n - m
    coordinate directions (m = 1..n); a candidate is kept when its normal is
    non-negative and every point lies on its upper side. Each kept candidate
    touches the polyhedron in a face of dimension n - 1, so de-duplicating the
    primitive (normal, offset) pairs leaves an irredundant list.

    Args:
        s: Non-empty support set

    Returns:
        NewtonPolyhedron with exact integer facets

    Raises:
        EmptySupportError: If s is empty
    """
    if not len(s):
        raise EmptySupportError("empty Taylor support")
    n = s.nvars
    points = s.minimal_points()
    axes = [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]

    facets = {}
    for m in range(1, min(n, len(points)) + 1):
        for combo in combinations(points, m):
            base = combo[0]
            spans = [tuple(a - b for a, b in zip(p, base)) for p in combo[1:]]
            for axis_set in combinations(range(n), n - m):
                normal = primitive_normal(spans + [axes[j] for j in axis_set], n)
                if normal is None:
                    continue
                if any(c < 0 for c in normal):
                    if any(c > 0 for c in normal):
                        continue
                    normal = tuple(-c for c in normal)
                offset = dot(normal, base)
                if (normal, offset) in facets:
                    continue
                if all(dot(normal, p) >= offset for p in points):
                    facets[(normal, offset)] = Facet(normal, offset)

    ordered = tuple(facets[key] for key in sorted(facets))
    vertices = tuple(
        p for p in points
        if exact_rank([f.normal for f in ordered if f.is_tight(p)]) == n
    )
    logger.debug(f"Newton polyhedron: {len(vertices)} vertices, {len(ordered)} facets")
    return NewtonPolyhedron(vertices, ordered, s)


def distance(polyhedron: NewtonPolyhedron) -> DistanceResult:
    """
    Newton distance: d = max over facets of offset / <normal, 1>

    The principal face is the intersection of the facets active at (d, ..., d);
    its dimension is n minus the rank of their normals.
    """
    n = polyhedron.nvars
    ratios = [(Fraction(f.offset, sum(f.normal)), f) for f in polyhedron.facets]
    d = max(r for r, _ in ratios)
    active = tuple(f for r, f in ratios if r == d)
    dim = n - exact_rank([f.normal for f in active])
    face_vertices = tuple(
        v for v in polyhedron.vertices if all(f.is_tight(v) for f in active)
    )
    # barycenter of the offset-normalized active normals: lies in the normal
    # cone of the principal face and satisfies <a, (d,...,d)> = 1
    weights = tuple(
        sum(Fraction(f.normal[i], f.offset) for f in active) / len(active) for i in range(n)
    )
    if dim == 0:
        logger.warning(f"Principal face at d = {d} is a vertex {face_vertices}; check the input")
    return DistanceResult(
        d=d,
        principal_face_dim=dim,
        principal_face_vertices=face_vertices,
        attaining_normal=weights,
        attaining_offset=Fraction(1),
        active_facets=active,
    )


def newton_distance(s: SupportSet) -> Fraction:
    """Shortcut: distance(build_polyhedron(s)).d"""
    return distance(build_polyhedron(s)).d
