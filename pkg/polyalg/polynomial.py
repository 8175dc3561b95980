"""
Sparse multivariate polynomials

Real polynomials in the variables x1..xn, stored as a canonical tuple of
monomials (graded order: total degree first, then x1-major within a degree).
Polynomial and LinearChange values are immutable; every operation returns a
new value.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.transform import Rotation

logger = logging.getLogger(__name__)

Exponents = Tuple[int, ...]
Number = Union[int, float]

# Relative coefficient pruning used when composing with a linear change
DEFAULT_PRUNE_TOL = 1e-12
SINGULAR_TOL = 1e-12
ROTATION_TOL = 1e-12


def term_order_key(exponents: Exponents) -> Tuple[int, Tuple[int, ...]]:
    """Sort key: lower total degree first, x1-heavy monomials first inside a degree."""
    return sum(exponents), tuple(-e for e in exponents)


def _format_coefficient(value: float) -> str:
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


# ============================================================================
# MONOMIAL
# ============================================================================

@dataclass(frozen=True)
class Monomial:
    """A single term c_k x^k"""
    exponents: Exponents
    coefficient: float

    def __post_init__(self):
        if not all(isinstance(e, (int, np.integer)) and e >= 0 for e in self.exponents):
            raise ValueError(f"Exponents must be non-negative integers: {self.exponents}")
        if self.coefficient == 0:
            raise ValueError("Monomial coefficient must be non-zero")
        if not math.isfinite(self.coefficient):
            raise ValueError(f"Monomial coefficient must be finite: {self.coefficient}")
        object.__setattr__(self, 'exponents', tuple(int(e) for e in self.exponents))
        object.__setattr__(self, 'coefficient', float(self.coefficient))

    @property
    def degree(self) -> int:
        return sum(self.exponents)

    def power_product(self) -> str:
        """Render x^k in the parse grammar ('' for the constant monomial)"""
        factors = []
        for index, power in enumerate(self.exponents, start=1):
            if power == 1:
                factors.append(f"x{index}")
            elif power > 1:
                factors.append(f"x{index}^{power}")
        return "*".join(factors)


# ============================================================================
# POLYNOMIAL
# ============================================================================

@dataclass(frozen=True)
class Polynomial:
    """
    Sparse polynomial in nvars variables.

    Terms are unique per exponent vector and kept in canonical order, so two
    polynomials with the same coefficients compare equal structurally.
    """
    nvars: int
    terms: Tuple[Monomial, ...] = ()

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError(f"nvars must be positive, got {self.nvars}")
        terms = tuple(sorted(self.terms, key=lambda m: term_order_key(m.exponents)))
        seen = set()
        for term in terms:
            if len(term.exponents) != self.nvars:
                raise ValueError(
                    f"Monomial {term.exponents} does not have {self.nvars} exponents"
                )
            if term.exponents in seen:
                raise ValueError(f"Duplicate exponent vector {term.exponents}")
            seen.add(term.exponents)
        object.__setattr__(self, 'terms', terms)

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def from_dict(cls, coefficients: Mapping[Exponents, Number], nvars: int,
                  prune_tol: float = 0.0) -> "Polynomial":
        """
        Build a canonical polynomial from an exponent -> coefficient mapping

        Args:
            coefficients: Mapping of exponent tuples to coefficients
            nvars: Number of variables
            prune_tol: Drop terms with |c| < prune_tol * max|c| (0 keeps all non-zero terms)

        Returns:
            Canonical Polynomial
        """
        items = {tuple(int(e) for e in k): float(c) for k, c in coefficients.items() if c != 0}
        if prune_tol > 0 and items:
            largest = max(abs(c) for c in items.values())
            cutoff = prune_tol * largest
            dropped = {k: c for k, c in items.items() if abs(c) < cutoff}
            if dropped:
                logger.debug(
                    f"Pruned {len(dropped)} term(s) below {cutoff:.3e} "
                    f"(largest pruned |c| = {max(abs(c) for c in dropped.values()):.3e})"
                )
                items = {k: c for k, c in items.items() if k not in dropped}
        return cls(nvars, tuple(Monomial(k, c) for k, c in items.items()))

    @classmethod
    def zero(cls, nvars: int = 3) -> "Polynomial":
        return cls(nvars, ())

    @classmethod
    def constant(cls, value: Number, nvars: int = 3) -> "Polynomial":
        return cls.from_dict({(0,) * nvars: value}, nvars)

    @classmethod
    def variable(cls, index: int, nvars: int = 3) -> "Polynomial":
        """The coordinate polynomial x_index (1-based)"""
        if not 1 <= index <= nvars:
            raise ValueError(f"Variable index {index} outside 1..{nvars}")
        exps = tuple(1 if i == index - 1 else 0 for i in range(nvars))
        return cls.from_dict({exps: 1.0}, nvars)

    # ------------------------------------------------------------------
    # Views
    # ------------------------------------------------------------------

    def as_dict(self) -> Dict[Exponents, float]:
        return {t.exponents: t.coefficient for t in self.terms}

    def coefficient(self, exponents: Sequence[int]) -> float:
        return self.as_dict().get(tuple(exponents), 0.0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    @property
    def constant_term(self) -> float:
        return self.coefficient((0,) * self.nvars)

    @property
    def max_abs_coefficient(self) -> float:
        return max((abs(t.coefficient) for t in self.terms), default=0.0)

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for position, term in enumerate(self.terms):
            magnitude = abs(term.coefficient)
            body = term.power_product()
            if not body:
                text = _format_coefficient(magnitude)
            elif magnitude == 1.0:
                text = body
            else:
                text = f"{_format_coefficient(magnitude)}*{body}"
            if position == 0:
                if term.coefficient < 0:
                    # the grammar only allows a sign inside parentheses
                    lead = f"(-{_format_coefficient(magnitude)})"
                    text = lead if not body else f"{lead}*{body}"
                parts.append(text)
            else:
                parts.append(("- " if term.coefficient < 0 else "+ ") + text)
        return " ".join(parts)

    def to_dict(self) -> dict:
        """JSON-ready representation"""
        return {
            'nvars': self.nvars,
            'text': str(self),
            'terms': [
                {'exponents': list(t.exponents), 'coefficient': t.coefficient}
                for t in self.terms
            ],
        }

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _check_compatible(self, other: "Polynomial"):
        if other.nvars != self.nvars:
            raise ValueError(f"Variable count mismatch: {self.nvars} vs {other.nvars}")

    def __add__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.nvars)
        self._check_compatible(other)
        merged = self.as_dict()
        for exps, coef in other.as_dict().items():
            merged[exps] = merged.get(exps, 0.0) + coef
        return Polynomial.from_dict(merged, self.nvars)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __sub__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other, self.nvars)
        return self + (-other)

    def __rsub__(self, other: Number) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other: Union["Polynomial", Number]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check_compatible(other)
        return Polynomial.from_dict(_mul_dicts(self.as_dict(), other.as_dict()), self.nvars)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "Polynomial":
        if not isinstance(power, int) or power < 0:
            raise ValueError(f"Polynomial powers must be non-negative integers, got {power}")
        result = Polynomial.constant(1.0, self.nvars)
        for _ in range(power):
            result = result * self
        return result

    def scale(self, factor: Number) -> "Polynomial":
        return Polynomial.from_dict(
            {t.exponents: t.coefficient * factor for t in self.terms}, self.nvars
        )

    def derivative(self, index: int) -> "Polynomial":
        """Partial derivative with respect to x_{index+1} (0-based index)"""
        if not 0 <= index < self.nvars:
            raise ValueError(f"Derivative index {index} outside 0..{self.nvars - 1}")
        result: Dict[Exponents, float] = {}
        for term in self.terms:
            power = term.exponents[index]
            if power == 0:
                continue
            exps = list(term.exponents)
            exps[index] -= 1
            result[tuple(exps)] = term.coefficient * power
        return Polynomial.from_dict(result, self.nvars)

    def isclose(self, other: "Polynomial", rel_tol: float = 1e-10) -> bool:
        """Coefficient-wise comparison relative to the largest coefficient of either side"""
        self._check_compatible(other)
        scale = max(self.max_abs_coefficient, other.max_abs_coefficient, 1e-300)
        a, b = self.as_dict(), other.as_dict()
        return all(abs(a.get(k, 0.0) - b.get(k, 0.0)) <= rel_tol * scale for k in set(a) | set(b))

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def __call__(self, x) -> Union[float, np.ndarray]:
        return evaluate(self, x)

    def restrict_to_line(self, direction: Sequence[float]) -> List[float]:
        """
        Coefficients of the univariate polynomial t -> p(t * direction)

        Returns:
            List where entry N is the coefficient of t^N
        """
        if len(direction) != self.nvars:
            raise ValueError(f"Direction has {len(direction)} components, expected {self.nvars}")
        coefficients = [0.0] * (self.degree + 1)
        for term in self.terms:
            value = term.coefficient
            for component, power in zip(direction, term.exponents):
                value *= component ** power
            coefficients[term.degree] += value
        return coefficients


def _mul_dicts(a: Mapping[Exponents, float], b: Mapping[Exponents, float]) -> Dict[Exponents, float]:
    result: Dict[Exponents, float] = {}
    for ka, ca in a.items():
        for kb, cb in b.items():
            key = tuple(x + y for x, y in zip(ka, kb))
            result[key] = result.get(key, 0.0) + ca * cb
    return result


# ============================================================================
# LINEAR CHANGES OF COORDINATES
# ============================================================================

@dataclass(frozen=True)
class LinearChange:
    """Invertible linear map x -> A x, stored row-major as nested tuples"""
    matrix: Tuple[Tuple[float, ...], ...]

    def __post_init__(self):
        array = np.asarray(self.matrix, dtype=float)
        if array.ndim != 2 or array.shape[0] != array.shape[1]:
            raise ValueError(f"Linear change must be a square matrix, got shape {array.shape}")
        if not np.all(np.isfinite(array)):
            raise ValueError("Linear change has non-finite entries")
        det = float(np.linalg.det(array))
        if abs(det) <= SINGULAR_TOL:
            raise ValueError(f"Singular matrix (|det| = {abs(det):.3e})")
        object.__setattr__(self, 'matrix', tuple(tuple(float(v) for v in row) for row in array))

    @classmethod
    def from_array(cls, array) -> "LinearChange":
        return cls(tuple(map(tuple, np.asarray(array, dtype=float))))

    @classmethod
    def identity(cls, n: int = 3) -> "LinearChange":
        return cls.from_array(np.eye(n))

    @classmethod
    def axis_rotation(cls, i: int, j: int, angle: float, n: int = 3) -> "LinearChange":
        """Rotation by angle in the (x_{i+1}, x_{j+1}) coordinate plane"""
        array = np.eye(n)
        c, s = math.cos(angle), math.sin(angle)
        array[i, i], array[i, j], array[j, i], array[j, j] = c, -s, s, c
        return cls.from_array(array)

    @classmethod
    def permutation(cls, order: Sequence[int]) -> "LinearChange":
        """Map sending x_{i+1} to x_{order[i]+1}"""
        n = len(order)
        array = np.zeros((n, n))
        for row, col in enumerate(order):
            array[row, col] = 1.0
        return cls.from_array(array)

    @classmethod
    def from_rotvec(cls, rotvec: Sequence[float]) -> "LinearChange":
        return cls.from_array(Rotation.from_rotvec(np.asarray(rotvec, dtype=float)).as_matrix())

    @property
    def array(self) -> np.ndarray:
        return np.array(self.matrix, dtype=float)

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.array))

    @property
    def is_rotation(self) -> bool:
        a = self.array
        return (np.allclose(a @ a.T, np.eye(self.n), atol=ROTATION_TOL, rtol=0.0)
                and abs(self.det - 1.0) <= ROTATION_TOL)

    def __matmul__(self, other: "LinearChange") -> "LinearChange":
        return LinearChange.from_array(self.array @ other.array)

    def inverse(self) -> "LinearChange":
        return LinearChange.from_array(np.linalg.inv(self.array))

    def apply(self, x) -> np.ndarray:
        """A x for a vector or a stack of row vectors"""
        return np.asarray(x, dtype=float) @ self.array.T

    def to_list(self) -> List[List[float]]:
        return [list(row) for row in self.matrix]


# ============================================================================
# OPERATIONS
# ============================================================================

def evaluate(p: Polynomial, x) -> Union[float, np.ndarray]:
    """
    Evaluate p term by term at one point or at a stack of points

    Args:
        p: Polynomial
        x: Array whose last axis has length p.nvars

    Returns:
        float for a single point, otherwise an array of shape x.shape[:-1]

    Raises:
        ValueError: If the last axis does not match nvars
    """
    points = np.asarray(x, dtype=float)
    if points.ndim == 0 or points.shape[-1] != p.nvars:
        raise ValueError(f"Expected points with {p.nvars} coordinates, got shape {points.shape}")
    total = np.zeros(points.shape[:-1])
    powers: Dict[Tuple[int, int], np.ndarray] = {}
    for term in p.terms:
        value = np.full(points.shape[:-1], term.coefficient)
        for index, power in enumerate(term.exponents):
            if power == 0:
                continue
            key = (index, power)
            if key not in powers:
                powers[key] = points[..., index] ** power
            value = value * powers[key]
        total = total + value
    if points.ndim == 1:
        return float(total)
    return total


def gradient(p: Polynomial) -> List[Polynomial]:
    """Component i is the partial derivative with respect to x_{i+1}"""
    return [p.derivative(i) for i in range(p.nvars)]


def hessian(p: Polynomial) -> List[List[Polynomial]]:
    first = gradient(p)
    return [[first[i].derivative(j) for j in range(p.nvars)] for i in range(p.nvars)]


def compose_linear(p: Polynomial, change: LinearChange,
                   prune_tol: float = DEFAULT_PRUNE_TOL) -> Polynomial:
    """
    Expand p(A x) into canonical form

    Each variable x_i is replaced by the linear form sum_j A_ij x_j; powers of
    those forms are expanded once and multiplied out per term.

    Args:
        p: Polynomial to transform
        change: Invertible linear change A
        prune_tol: Relative threshold for dropping numerical dust

    Returns:
        The composed polynomial

    Raises:
        ValueError: On a dimension mismatch
    """
    if change.n != p.nvars:
        raise ValueError(f"Linear change is {change.n}x{change.n} but polynomial has {p.nvars} variables")
    n = p.nvars
    unit = [tuple(1 if k == j else 0 for k in range(n)) for j in range(n)]
    forms = [
        {unit[j]: change.matrix[i][j] for j in range(n) if change.matrix[i][j] != 0.0}
        for i in range(n)
    ]
    max_power = [max((t.exponents[i] for t in p.terms), default=0) for i in range(n)]
    form_powers: List[List[Dict[Exponents, float]]] = []
    for i in range(n):
        chain = [{(0,) * n: 1.0}]
        for _ in range(max_power[i]):
            chain.append(_mul_dicts(chain[-1], forms[i]))
        form_powers.append(chain)

    result: Dict[Exponents, float] = {}
    for term in p.terms:
        expanded = {(0,) * n: term.coefficient}
        for i, power in enumerate(term.exponents):
            if power:
                expanded = _mul_dicts(expanded, form_powers[i][power])
        for exps, coef in expanded.items():
            result[exps] = result.get(exps, 0.0) + coef
    return Polynomial.from_dict(result, n, prune_tol=prune_tol)
