"""
Newton polyhedron of a Taylor support, Newton distance and principal face
"""

from .support import EmptySupportError, SupportSet, support
from .polyhedron import (
    DistanceResult,
    Facet,
    NewtonPolyhedron,
    build_polyhedron,
    distance,
    newton_distance,
)
from .oracle import distance_oracle

__all__ = [
    'DistanceResult',
    'EmptySupportError',
    'Facet',
    'NewtonPolyhedron',
    'SupportSet',
    'build_polyhedron',
    'distance',
    'distance_oracle',
    'newton_distance',
    'support',
]
