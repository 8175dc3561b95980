"""
Restriction and decay exponents derived from the height

All quantities are exact rationals:
    beta   = 1/h                      decay rate of the surface-measure transform
    p*     = 2(1+h)/(2h+1)            endpoint of the (L_p, L_2) restriction range
    q*     = 2(1+h)                   dual exponent of p*
    q_low  = 2d+2                     Knapp lower bound for the dual exponent
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

from tool.schema import format_rational

logger = logging.getLogger(__name__)

Rational = Union[Fraction, int]

# x1, x2, x3: the surface is a graph over R^3
GRAPH_DIM = 3


def greenleaf_p(beta: Rational, m: int = 1) -> Fraction:
    """
    Restriction exponent from decay rate beta and codimension m: 2(m+beta)/(2m+beta)

    Raises:
        ValueError: If beta <= 0 or m < 1
    """
    beta = Fraction(beta)
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if m < 1:
        raise ValueError(f"codimension m must be at least 1, got {m}")
    return 2 * (m + beta) / (2 * m + beta)


def dual_exponent(p: Rational) -> Fraction:
    """
    q with 1/p + 1/q = 1

    Raises:
        ValueError: If p <= 1 (q would be infinite or negative)
    """
    p = Fraction(p)
    if p <= 1:
        raise ValueError(f"dual exponent undefined for p <= 1, got {p}")
    return p / (p - 1)


def decay_rate(h: Rational) -> Fraction:
    h = Fraction(h)
    if h <= 0:
        raise ValueError(f"height must be positive, got {h}")
    return 1 / h


def tomas_stein_p(n: int) -> Fraction:
    """Classical sphere threshold 2(n+1)/(n+3) in R^n"""
    return Fraction(2 * (n + 1), n + 3)


@dataclass(frozen=True)
class ExponentReport:
    """Exponents of the restriction problem for a hypersurface of height h"""
    h: Fraction
    beta: Fraction
    p_star: Fraction
    q_star: Fraction
    q_lower: Fraction
    m: int
    d: Fraction

    @property
    def adapted(self) -> bool:
        """Distance in the given coordinates already equals the height"""
        return self.d == self.h

    @property
    def ambient_dim(self) -> int:
        return GRAPH_DIM + self.m

    @property
    def matches_tomas_stein(self) -> bool:
        return self.p_star == tomas_stein_p(self.ambient_dim)

    def to_dict(self) -> dict:
        return {
            'h': format_rational(self.h),
            'beta': format_rational(self.beta),
            'p_star': format_rational(self.p_star),
            'q_star': format_rational(self.q_star),
            'q_lower': format_rational(self.q_lower),
            'm': self.m,
            'd': format_rational(self.d),
            'adapted': self.adapted,
            'matches_tomas_stein': self.matches_tomas_stein,
        }


def critical_p(h: Rational, d: Optional[Rational] = None, m: int = 1) -> ExponentReport:
    """
    Fill every exponent for height h

    Args:
        h: Height (> 0)
        d: Newton distance in the working coordinates (defaults to h)
        m: Codimension (1 for hypersurfaces)

    Returns:
        ExponentReport

    Raises:
        ValueError: If h <= 0
        ArithmeticError: If the internal exponent identities fail
    """
    h = Fraction(h)
    if h <= 0:
        raise ValueError(f"height must be positive, got {h}")
    d = h if d is None else Fraction(d)
    beta = decay_rate(h)
    p_star = 2 * (1 + h) / (2 * h + 1)
    q_star = 2 * (1 + h)

    if greenleaf_p(beta, 1) != p_star:
        raise ArithmeticError(f"greenleaf_p(1/h, 1) != 2(1+h)/(2h+1) for h = {h}")
    if 1 / p_star + 1 / q_star != 1:
        raise ArithmeticError(f"p* and q* are not dual for h = {h}")

    report = ExponentReport(h=h, beta=beta, p_star=p_star, q_star=q_star,
                            q_lower=2 * d + 2, m=m, d=d)
    logger.debug(f"Exponents for h = {h}: p* = {p_star}, q* = {q_star}")
    return report
