"""Exact rational scalars, univariate polynomials and piecewise integration.

Every number in the engine is a ``fractions.Fraction``. Nothing here ever
produces a float: an operation that would need an irrational value raises
instead of approximating.

  Poly1        dense polynomial in one variable, ascending coefficients
  Affine2      c0 + cu*u + cv*v, used for chamber event lines
  PiecewisePoly  ordered, contiguous (lo, hi, poly) pieces
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

from loguru import logger

from engine.errors import (
    ConstantZero,
    IrrationalBoundary,
    NonRationalValue,
    VerificationFailed,
)


Rational = Fraction
RationalLike = Union[int, Fraction, str]

_RATIONAL_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def parse_rational(text: str) -> Fraction:
    """Parse a ``"p/q"`` or ``"p"`` string into an exact Fraction."""
    match = _RATIONAL_PATTERN.match(text)
    if not match:
        hint = ""
        if re.match(r"^\s*[+-]?\d*\.\d+\s*$", text) or "e" in text.lower():
            try:
                hint = f"; write it as \"{Fraction(text.strip())}\""
            except ValueError:
                hint = ""
        raise NonRationalValue(f"{text!r} is not an exact rational 'p/q'{hint}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) else 1
    if denominator == 0:
        raise NonRationalValue(f"{text!r} has a zero denominator")
    return Fraction(numerator, denominator)


def format_rational(value: Fraction) -> str:
    """Inverse of parse_rational; integers are written without a denominator."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def as_rational(value: Any) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings; reject floats and bools."""
    if isinstance(value, bool):
        raise NonRationalValue(f"{value!r} is a boolean, not a rational")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, float):
        raise NonRationalValue(
            f"{value!r} is a float; write it as \"{format_rational(Fraction(value).limit_denominator())}\""
        )
    raise NonRationalValue(f"{value!r} is not an exact rational")


@dataclass(frozen=True, eq=False)
class Poly1:
    """Polynomial in one variable with exact coefficients (ascending degree)."""

    coeffs: Tuple[Fraction, ...] = ()

    def __post_init__(self) -> None:
        trimmed = [as_rational(c) for c in self.coeffs]
        while trimmed and trimmed[-1] == 0:
            trimmed.pop()
        object.__setattr__(self, "coeffs", tuple(trimmed))

    @classmethod
    def constant(cls, value: RationalLike) -> "Poly1":
        return cls((as_rational(value),))

    @classmethod
    def variable(cls) -> "Poly1":
        return cls((0, 1))

    @classmethod
    def linear(cls, c0: RationalLike, c1: RationalLike) -> "Poly1":
        """c0 + c1*x."""
        return cls((as_rational(c0), as_rational(c1)))

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree -1."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int) -> Fraction:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    @staticmethod
    def _coerce(other: Any) -> Optional["Poly1"]:
        if isinstance(other, Poly1):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Poly1((Fraction(other),))
        return None

    def __add__(self, other: Any) -> "Poly1":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        size = max(len(self.coeffs), len(rhs.coeffs))
        return Poly1(tuple(self.coefficient(k) + rhs.coefficient(k) for k in range(size)))

    __radd__ = __add__

    def __neg__(self) -> "Poly1":
        return Poly1(tuple(-c for c in self.coeffs))

    def __sub__(self, other: Any) -> "Poly1":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: Any) -> "Poly1":
        lhs = self._coerce(other)
        if lhs is None:
            return NotImplemented
        return lhs - self

    def __mul__(self, other: Any) -> "Poly1":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        if self.is_zero() or rhs.is_zero():
            return Poly1()
        out = [Fraction(0)] * (len(self.coeffs) + len(rhs.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(rhs.coeffs):
                out[i + j] += a * b
        return Poly1(tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> "Poly1":
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return Poly1(tuple(c / Fraction(other) for c in self.coeffs))
        return NotImplemented

    def __pow__(self, exponent: int) -> "Poly1":
        if exponent < 0:
            raise ValueError("negative powers are not polynomials")
        result = Poly1((1,))
        for _ in range(exponent):
            result = result * self
        return result

    def __call__(self, x: Any) -> Any:
        """Horner evaluation; ``x`` may itself be a Poly1 (composition)."""
        result: Any = Fraction(0)
        for c in reversed(self.coeffs):
            result = result * x + c
        return result

    def __eq__(self, other: object) -> bool:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self.coeffs == rhs.coeffs

    def __hash__(self) -> int:
        return hash(("Poly1", self.coeffs))

    def derivative(self) -> "Poly1":
        return Poly1(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def antiderivative(self) -> "Poly1":
        """Antiderivative vanishing at 0."""
        return Poly1((Fraction(0),) + tuple(c / (k + 1) for k, c in enumerate(self.coeffs)))

    def integrate(self, a: RationalLike, b: RationalLike) -> Fraction:
        primitive = self.antiderivative()
        return primitive(as_rational(b)) - primitive(as_rational(a))

    def __repr__(self) -> str:
        return f"Poly1({self})"

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            magnitude = abs(c)
            power = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            body = format_rational(magnitude) if (magnitude != 1 or not power) else ""
            if body and power:
                body = f"{body}*{power}" if magnitude.denominator != 1 else f"{body}{power}"
            else:
                body = body or power
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        text = ("-" if first_sign == "-" else "") + first_body
        for sign, body in terms[1:]:
            text += f" {sign} {body}"
        return text


X = Poly1.variable()


def germ_sign(p: Poly1, x0: Fraction) -> int:
    """Sign of ``p`` on (x0, x0 + eps) for all small eps > 0."""
    current = p
    while not current.is_zero():
        value = current(x0)
        if value != 0:
            return 1 if value > 0 else -1
        current = current.derivative()
    return 0


def integrate_poly(p: Poly1, a: RationalLike, b: RationalLike) -> Fraction:
    """Exact definite integral of ``p`` over [a, b]."""
    a, b = as_rational(a), as_rational(b)
    if a > b:
        raise ValueError(f"integration bounds out of order: {a} > {b}")
    return p.integrate(a, b)


def interpolate_verified(
    samples: Sequence[Tuple[RationalLike, RationalLike]],
    degree: int,
    checks: Sequence[Tuple[RationalLike, RationalLike]],
) -> Poly1:
    """Interpolate through ``degree + 1`` samples and confirm every check point.

    A failed check means the data is not one polynomial of that degree on the
    sampled interval (in practice: a chamber breakpoint sits inside it).
    """
    points = [(as_rational(x), as_rational(y)) for x, y in samples]
    extra = [(as_rational(x), as_rational(y)) for x, y in checks]
    if len(points) != degree + 1:
        raise ValueError(f"need {degree + 1} samples for degree {degree}, got {len(points)}")
    if len({x for x, _ in points}) != len(points):
        raise ValueError("sample abscissae must be distinct")
    if not extra:
        raise ValueError("at least one check point is required")

    poly = Poly1()
    for i, (xi, yi) in enumerate(points):
        if yi == 0:
            continue
        basis = Poly1((1,))
        for j, (xj, _) in enumerate(points):
            if j != i:
                basis = basis * Poly1((-xj, 1)) / (xi - xj)
        poly = poly + yi * basis

    for x, y in extra:
        got = poly(x)
        if got != y:
            raise VerificationFailed(
                f"interpolant of degree {degree} gives {format_rational(got)} at "
                f"{format_rational(x)}, expected {format_rational(y)}"
            )
    return poly


@dataclass(frozen=True)
class Affine2:
    """c0 + cu*u + cv*v with exact coefficients."""

    c0: Fraction = Fraction(0)
    cu: Fraction = Fraction(0)
    cv: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for name in ("c0", "cu", "cv"):
            object.__setattr__(self, name, as_rational(getattr(self, name)))

    def __call__(self, u: RationalLike, v: RationalLike = 0) -> Fraction:
        return self.c0 + self.cu * as_rational(u) + self.cv * as_rational(v)

    def __add__(self, other: "Affine2") -> "Affine2":
        return Affine2(self.c0 + other.c0, self.cu + other.cu, self.cv + other.cv)

    def __sub__(self, other: "Affine2") -> "Affine2":
        return Affine2(self.c0 - other.c0, self.cu - other.cu, self.cv - other.cv)

    def __neg__(self) -> "Affine2":
        return Affine2(-self.c0, -self.cu, -self.cv)

    def scale(self, factor: RationalLike) -> "Affine2":
        f = as_rational(factor)
        return Affine2(self.c0 * f, self.cu * f, self.cv * f)

    def at_u(self, u: RationalLike) -> Poly1:
        """Specialise to a polynomial in v."""
        return Poly1((self.c0 + self.cu * as_rational(u), self.cv))

    def in_u(self) -> Poly1:
        """The u-polynomial of a v-free affine function."""
        if self.cv != 0:
            raise ValueError("affine function depends on v")
        return Poly1((self.c0, self.cu))


def affine_root(a: Affine2, u: RationalLike) -> Optional[Fraction]:
    """The v with a(u, v) = 0, or None when a(u, .) is a nonzero constant."""
    base = a.c0 + a.cu * as_rational(u)
    if a.cv == 0:
        if base == 0:
            raise ConstantZero(f"event line {a} vanishes identically at u={format_rational(as_rational(u))}")
        return None
    return -base / a.cv


@dataclass(frozen=True)
class Piece:
    lo: Fraction
    hi: Fraction
    poly: Poly1


@dataclass(frozen=True)
class PiecewisePoly:
    """Contiguous pieces; continuity at breakpoints unless ``allow_jumps``."""

    pieces: Tuple[Piece, ...] = ()
    allow_jumps: bool = False

    def __post_init__(self) -> None:
        normalized = tuple(
            Piece(as_rational(p.lo), as_rational(p.hi), p.poly) for p in self.pieces
        )
        object.__setattr__(self, "pieces", normalized)
        for piece in normalized:
            if piece.lo > piece.hi:
                raise ValueError(f"piece [{piece.lo}, {piece.hi}] is reversed")
        for left, right in zip(normalized, normalized[1:]):
            if left.hi != right.lo:
                raise ValueError(
                    f"pieces are not contiguous: {format_rational(left.hi)} != {format_rational(right.lo)}"
                )
            if not self.allow_jumps and left.poly(left.hi) != right.poly(right.lo):
                raise VerificationFailed(
                    f"discontinuity at {format_rational(left.hi)}: "
                    f"{format_rational(left.poly(left.hi))} vs {format_rational(right.poly(right.lo))}"
                )

    @classmethod
    def from_pieces(
        cls, pieces: Iterable[Tuple[RationalLike, RationalLike, Poly1]], allow_jumps: bool = False
    ) -> "PiecewisePoly":
        return cls(tuple(Piece(as_rational(lo), as_rational(hi), p) for lo, hi, p in pieces), allow_jumps)

    @property
    def breakpoints(self) -> List[Fraction]:
        if not self.pieces:
            return []
        return [self.pieces[0].lo] + [p.hi for p in self.pieces]

    def __call__(self, x: RationalLike) -> Fraction:
        x = as_rational(x)
        for piece in self.pieces:
            if piece.lo <= x <= piece.hi:
                return piece.poly(x)
        raise ValueError(f"{format_rational(x)} is outside the domain")

    def integrate(self) -> Fraction:
        return sum((p.poly.integrate(p.lo, p.hi) for p in self.pieces), Fraction(0))


def piecewise_integrate(f: PiecewisePoly) -> Fraction:
    """Sum of the exact piece integrals."""
    return f.integrate()


# -- exact linear algebra ---------------------------------------------------------

Matrix = Sequence[Sequence[Fraction]]


def solve_linear(matrix: Matrix, rhs: Sequence[Any]) -> List[Any]:
    """Solve ``matrix @ x = rhs`` by Gauss-Jordan elimination.

    ``rhs`` entries only need +, - and multiplication by a Fraction, so a
    right-hand side of Poly1 values yields a solution of Poly1 values.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix) or len(rhs) != n:
        raise ValueError("solve_linear needs a square system")
    a = [[Fraction(x) for x in row] for row in matrix]
    b = list(rhs)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise VerificationFailed("singular system")
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            b[col], b[pivot] = b[pivot], b[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        b[col] = b[col] * inv
        for r in range(n):
            if r != col and a[r][col] != 0:
                factor = a[r][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
                b[r] = b[r] - b[col] * factor
    return b


def determinant(matrix: Matrix) -> Fraction:
    n = len(matrix)
    a = [[Fraction(x) for x in row] for row in matrix]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det *= a[col][col]
        for r in range(col + 1, n):
            if a[r][col] != 0:
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return det


def is_negative_definite(gram: Matrix) -> bool:
    """Sylvester's criterion applied to -gram."""
    n = len(gram)
    negated = [[-Fraction(x) for x in row] for row in gram]
    return all(determinant([row[:k] for row in negated[:k]]) > 0 for k in range(1, n + 1))


def rational_sqrt(value: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None if irrational."""
    value = Fraction(value)
    if value < 0:
        return None
    num_root = math.isqrt(value.numerator)
    den_root = math.isqrt(value.denominator)
    if num_root * num_root == value.numerator and den_root * den_root == value.denominator:
        return Fraction(num_root, den_root)
    return None


def rational_roots(p: Poly1) -> List[Fraction]:
    """Sorted real roots of a polynomial of degree <= 2, all rational.

    Raises IrrationalBoundary when a real root exists but is irrational.
    """
    if p.degree > 2:
        raise ValueError("rational_roots handles degree <= 2 only")
    if p.degree <= 0:
        return []
    if p.degree == 1:
        return [-p.coeffs[0] / p.coeffs[1]]
    c, b, a = p.coeffs
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    root = rational_sqrt(disc)
    if root is None:
        raise IrrationalBoundary(f"roots of {p} involve sqrt({format_rational(disc)})")
    roots = {(-b - root) / (2 * a), (-b + root) / (2 * a)}
    logger.debug(f"roots of {p}: {sorted(roots)}")
    return sorted(roots)
