"""
Brute-force Newton distance oracle

Solves  min t  s.t.  t*1 = sum_j lambda_j k_j + v,  lambda >= 0,  sum lambda = 1,  v >= 0
by enumerating basic feasible solutions in exact rational arithmetic. It
shares no code with the facet enumeration and serves as its cross-check.
"""

import logging
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence

from .support import EmptySupportError, SupportSet

logger = logging.getLogger(__name__)


def solve_exact(matrix: List[List[Fraction]], rhs: List[Fraction]) -> Optional[List[Fraction]]:
    """Gauss-Jordan elimination over the rationals; None for a singular system"""
    size = len(matrix)
    rows = [list(row) + [value] for row, value in zip(matrix, rhs)]
    for col in range(size):
        pivot = next((r for r in range(col, size) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        lead = rows[col][col]
        rows[col] = [v / lead for v in rows[col]]
        for r in range(size):
            if r != col and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[col])]
    return [row[-1] for row in rows]


def distance_oracle(s: SupportSet) -> Fraction:
    """
    Newton distance by exhaustive basic-solution enumeration

    A basic optimum puts weight on m <= n points and makes m coordinate rows
    tight; every (points, rows) pair with |points| = |rows| is solved exactly
    and the smallest feasible t is returned.

    Args:
        s: Non-empty support set

    Returns:
        Exact rational distance

    Raises:
        EmptySupportError: If s is empty
    """
    if not len(s):
        raise EmptySupportError("empty Taylor support")
    n = s.nvars
    points = [tuple(Fraction(c) for c in k) for k in s.points]
    best: Optional[Fraction] = None

    for m in range(1, min(n, len(points)) + 1):
        for chosen in combinations(points, m):
            for rows in combinations(range(n), m):
                solution = _basic_solution(chosen, rows)
                if solution is None:
                    continue
                weights, t = solution[:-1], solution[-1]
                if any(w < 0 for w in weights):
                    continue
                mix = [sum(w * k[i] for w, k in zip(weights, chosen)) for i in range(n)]
                if any(value > t for value in mix):
                    continue
                if best is None or t < best:
                    best = t

    logger.debug(f"Oracle distance for {len(points)} points: {best}")
    return best


def _basic_solution(chosen: Sequence[Sequence[Fraction]], rows: Sequence[int]) -> Optional[List[Fraction]]:
    """Unknowns (lambda_1..lambda_m, t): sum lambda = 1 and (K lambda)_i = t for i in rows"""
    m = len(chosen)
    matrix = [[Fraction(1)] * m + [Fraction(0)]]
    rhs = [Fraction(1)]
    for i in rows:
        matrix.append([k[i] for k in chosen] + [Fraction(-1)])
        rhs.append(Fraction(0))
    return solve_exact(matrix, rhs)
