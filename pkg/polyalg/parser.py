"""
Polynomial text parser

Recursive-descent reader for the expression grammar

    expr     := term (('+'|'-') term)*
    term     := factor ('*' factor)*
    factor   := base ('^' uint)?
    base     := number | variable | '(' expr ')'
    variable := 'x' uint

Whitespace is insignificant, implicit multiplication is rejected and a sign
is accepted on a number only directly inside parentheses, e.g. "(-2)*x1".
"""

import re
from typing import Dict, Optional

from .polynomial import Exponents, Polynomial

NUMBER_PATTERN = re.compile(r'(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?')
UINT_PATTERN = re.compile(r'\d+')

MAX_EXPONENT = 64
MAX_DEGREE = 256

Terms = Dict[Exponents, float]


class PolynomialSyntaxError(ValueError):
    """Raised when polynomial text does not follow the grammar"""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.reason = message
        self.offset = offset


class PolynomialParser:
    """Parser for polynomial expressions in x1..xn"""

    def __init__(self, nvars: int = 3, max_exponent: int = MAX_EXPONENT,
                 max_degree: int = MAX_DEGREE):
        """
        Initialize PolynomialParser

        Args:
            nvars: Number of variables; x1..x{nvars} are accepted
            max_exponent: Largest exponent accepted after '^'
            max_degree: Largest total degree of any intermediate term
        """
        self.nvars = nvars
        self.max_exponent = max_exponent
        self.max_degree = max_degree
        self._text = ""
        self._pos = 0

    def parse(self, text: str) -> Polynomial:
        """
        Parse text into a canonical Polynomial

        Args:
            text: Expression following the grammar above

        Returns:
            Canonical Polynomial (exactly cancelling terms are removed)

        Raises:
            PolynomialSyntaxError: On grammar violations, bad variable indices
                or exponent overflow
        """
        self._text = text
        self._pos = 0
        self._skip_whitespace()
        if self._at_end():
            self._fail("empty expression")
        terms = self._expr()
        self._skip_whitespace()
        if not self._at_end():
            self._fail(f"unexpected character {self._text[self._pos]!r}")
        return Polynomial.from_dict(terms, self.nvars)

    # ------------------------------------------------------------------
    # Grammar rules
    # ------------------------------------------------------------------

    def _expr(self) -> Terms:
        result = self._term()
        while True:
            op = self._peek()
            if op not in ('+', '-'):
                return result
            self._pos += 1
            right = self._term()
            sign = 1.0 if op == '+' else -1.0
            for exps, coef in right.items():
                result[exps] = result.get(exps, 0.0) + sign * coef

    def _term(self) -> Terms:
        result = self._factor()
        while self._peek() == '*':
            self._pos += 1
            result = self._multiply(result, self._factor())
        return result

    def _factor(self) -> Terms:
        base = self._base()
        if self._peek() != '^':
            return base
        self._pos += 1
        self._skip_whitespace()
        start = self._pos
        power = self._uint("exponent")
        if power > self.max_exponent:
            self._fail(f"exponent overflow: {power} > {self.max_exponent}", start)
        result: Terms = {(0,) * self.nvars: 1.0}
        for _ in range(power):
            result = self._multiply(result, base, start)
        return result

    def _base(self) -> Terms:
        char = self._peek()
        if char is None:
            self._fail("unexpected end of input")
        if char == '(':
            self._pos += 1
            signed = self._signed_number()
            if signed is not None:
                self._expect(')')
                return self._constant(signed)
            inner = self._expr()
            self._expect(')')
            return inner
        if char == 'x':
            return self._variable()
        if char.isdigit() or char == '.':
            return self._constant(self._number())
        self._fail(f"unexpected character {char!r}")

    # ------------------------------------------------------------------
    # Tokens
    # ------------------------------------------------------------------

    def _variable(self) -> Terms:
        start = self._pos
        self._pos += 1
        if self._pos >= len(self._text) or not self._text[self._pos].isdigit():
            self._fail("variable name must be 'x' followed by an index", start)
        index = self._uint("variable index")
        if not 1 <= index <= self.nvars:
            self._fail(f"variable index {index} outside 1..{self.nvars}", start)
        exps = tuple(1 if i == index - 1 else 0 for i in range(self.nvars))
        return {exps: 1.0}

    def _number(self) -> float:
        match = NUMBER_PATTERN.match(self._text, self._pos)
        if not match:
            self._fail("expected a number")
        self._pos = match.end()
        return float(match.group())

    def _signed_number(self) -> Optional[float]:
        """A sign directly followed by a number, then ')'; restores position otherwise"""
        saved = self._pos
        char = self._peek()
        if char not in ('+', '-'):
            return None
        self._pos += 1
        self._skip_whitespace()
        match = NUMBER_PATTERN.match(self._text, self._pos)
        if match:
            self._pos = match.end()
            if self._peek() == ')':
                value = float(match.group())
                return -value if char == '-' else value
        self._pos = saved
        return None

    def _uint(self, what: str) -> int:
        match = UINT_PATTERN.match(self._text, self._pos)
        if not match:
            self._fail(f"expected unsigned integer {what}")
        self._pos = match.end()
        return int(match.group())

    def _expect(self, char: str):
        if self._peek() != char:
            found = self._peek()
            self._fail(f"expected {char!r}, found {'end of input' if found is None else repr(found)}")
        self._pos += 1

    # ------------------------------------------------------------------
    # Helpers
    # ------------------------------------------------------------------

    def _constant(self, value: float) -> Terms:
        return {(0,) * self.nvars: value}

    def _multiply(self, a: Terms, b: Terms, offset: Optional[int] = None) -> Terms:
        result: Terms = {}
        for ka, ca in a.items():
            for kb, cb in b.items():
                key = tuple(x + y for x, y in zip(ka, kb))
                if sum(key) > self.max_degree:
                    self._fail(f"exponent overflow: degree above {self.max_degree}", offset)
                result[key] = result.get(key, 0.0) + ca * cb
        return result

    def _peek(self) -> Optional[str]:
        self._skip_whitespace()
        return None if self._at_end() else self._text[self._pos]

    def _skip_whitespace(self):
        while self._pos < len(self._text) and self._text[self._pos].isspace():
            self._pos += 1

    def _at_end(self) -> bool:
        return self._pos >= len(self._text)

    def _fail(self, message: str, position: Optional[int] = None):
        position = self._pos if position is None else position
        raise PolynomialSyntaxError(message, len(self._text[:position].encode('utf-8')))


def parse(text: str, nvars: int = 3) -> Polynomial:
    """Parse polynomial text in x1..x{nvars}"""
    return PolynomialParser(nvars=nvars).parse(text)
