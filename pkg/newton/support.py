"""
Taylor support of a polynomial

The support is the set of exponent vectors with a non-zero coefficient,
origin excluded.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from polyalg import Polynomial

logger = logging.getLogger(__name__)

Point = Tuple[int, ...]


class EmptySupportError(ValueError):
    """Raised when a polynomial has no non-constant terms"""


@dataclass(frozen=True)
class SupportSet:
    """Integer multi-indices k != 0 with non-zero Taylor coefficient"""
    points: Tuple[Point, ...]
    nvars: int

    def __post_init__(self):
        cleaned = sorted({tuple(int(c) for c in k) for k in self.points})
        for k in cleaned:
            if len(k) != self.nvars:
                raise ValueError(f"Point {k} does not have {self.nvars} coordinates")
            if any(c < 0 for c in k):
                raise ValueError(f"Point {k} has a negative coordinate")
            if not any(k):
                raise ValueError("The origin is never part of a Taylor support")
        object.__setattr__(self, 'points', tuple(cleaned))

    @classmethod
    def from_points(cls, points: Iterable[Sequence[int]], nvars: Optional[int] = None) -> "SupportSet":
        points = [tuple(k) for k in points]
        if nvars is None:
            if not points:
                raise EmptySupportError("empty Taylor support")
            nvars = len(points[0])
        return cls(tuple(points), nvars)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def with_point(self, point: Sequence[int]) -> "SupportSet":
        return SupportSet(self.points + (tuple(point),), self.nvars)

    def permuted(self, order: Sequence[int]) -> "SupportSet":
        """Relabel coordinates: new coordinate i is old coordinate order[i]"""
        return SupportSet(tuple(tuple(k[j] for j in order) for k in self.points), self.nvars)

    def minimal_points(self) -> List[Point]:
        """Points not dominated component-wise by another support point"""
        return [
            k for k in self.points
            if not any(o != k and all(a <= b for a, b in zip(o, k)) for o in self.points)
        ]

    def to_list(self) -> List[List[int]]:
        return [list(k) for k in self.points]


def support(p: Polynomial) -> SupportSet:
    """
    Taylor support of p

    Args:
        p: Polynomial (already pruned by the caller where relevant)

    Returns:
        SupportSet of exponent vectors, origin excluded

    Raises:
        EmptySupportError: If p is zero or constant
    """
    if p.constant_term != 0:
        logger.warning(
            f"Constant term {p.constant_term:g} dropped from the Taylor support (phi(0) = 0 is assumed)"
        )
    points = tuple(t.exponents for t in p.terms if any(t.exponents))
    if not points:
        raise EmptySupportError("empty Taylor support")
    return SupportSet(points, p.nvars)
