"""Binary cubic pencils u f(x, y) = v g(x, y) cutting twisted quartics on P1 x P1.

The curve u(x^3 + a x^2 y) = v(y^3 + b y^2 x) is smooth iff f and g have no
common root, and the projection to [u:v] is a triple cover whose branch
points are the roots of the discriminant of u f - v g as a cubic in (x, y).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Any, List, Sequence, Tuple

from loguru import logger

from engine.errors import FactorizationMismatch, IdenticallyZero
from engine.exact_core import Poly1, RationalLike, X, as_rational, format_rational, solve_linear


@dataclass(frozen=True)
class BinaryForm:
    """sum_i coeffs[i] x^i y^(degree - i); coefficients are Fractions or Poly1."""

    degree: int
    coeffs: Tuple[Any, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.degree + 1:
            raise ValueError(f"a form of degree {self.degree} needs {self.degree + 1} coefficients")
        object.__setattr__(
            self, "coeffs", tuple(c if isinstance(c, Poly1) else as_rational(c) for c in self.coeffs)
        )

    def evaluate(self, x: Any, y: Any) -> Any:
        total: Any = Fraction(0)
        for i, c in enumerate(self.coeffs):
            total = total + c * x ** i * y ** (self.degree - i)
        return total

    def at(self, value: RationalLike) -> "BinaryForm":
        """Specialize Poly1 coefficients at a parameter value."""
        value = as_rational(value)
        return BinaryForm(self.degree, tuple(c(value) if isinstance(c, Poly1) else c for c in self.coeffs))

    def __str__(self) -> str:
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            monomial = "".join(
                f"{var}^{p}" if p > 1 else var for var, p in (("x", i), ("y", self.degree - i)) if p > 0
            )
            shown = f"({c})" if isinstance(c, Poly1) else format_rational(c)
            if shown == "1" and monomial:
                shown = ""
            terms.append(f"{shown}{monomial}" if monomial else shown)
        return " + ".join(terms) or "0"


def _cubic(f: BinaryForm) -> Tuple[Any, Any, Any, Any]:
    if f.degree != 3:
        raise ValueError(f"expected a binary cubic, got degree {f.degree}")
    c0, c1, c2, c3 = f.coeffs
    return c3, c2, c1, c0


def cubic_discriminant(f: BinaryForm) -> Any:
    """18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2 for a x^3 + b x^2 y + c x y^2 + d y^3."""
    a, b, c, d = _cubic(f)
    return 18 * a * b * c * d - 4 * b ** 3 * d + b * b * c * c - 4 * a * c ** 3 - 27 * a * a * d * d


def _laplace(matrix: Sequence[Sequence[Any]]) -> Any:
    if len(matrix) == 1:
        return matrix[0][0]
    total: Any = Fraction(0)
    for j, entry in enumerate(matrix[0]):
        if entry == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = entry * _laplace(minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def resultant_cubics(f: BinaryForm, g: BinaryForm) -> Any:
    """Determinant of the 6x6 Sylvester matrix, rows of f first.

    With this ordering Res(f, g) = a_f^3 * prod g(roots of f), so for
    f = x^3 + l x^2 y and g = y^3 + l x y^2 the value is 1 - l^2.
    """
    rows_f = list(_cubic(f))
    rows_g = list(_cubic(g))
    zero = Fraction(0)
    sylvester = []
    for coeffs in (rows_f, rows_g):
        for shift in range(3):
            sylvester.append([zero] * shift + coeffs + [zero] * (2 - shift))
    return _laplace(sylvester)


def pencil_forms(a: Any, b: Any) -> Tuple[BinaryForm, BinaryForm]:
    """f = x^3 + a x^2 y and g = y^3 + b x y^2; a, b may be Poly1 in a parameter."""
    return BinaryForm(3, (0, 0, a, 1)), BinaryForm(3, (1, b, 0, 0))


def star_forms(lam: Any) -> Tuple[BinaryForm, BinaryForm]:
    return pencil_forms(lam, lam)


def pencil_discriminant(f: BinaryForm, g: BinaryForm) -> Poly1:
    """Discriminant of u f - v g as a polynomial in s = u/v (v = 1)."""
    s = X
    member = BinaryForm(3, tuple(s * fc - gc for fc, gc in zip(f.coeffs, g.coeffs)))
    return Poly1._coerce(cubic_discriminant(member))


# -- univariate helpers ------------------------------------------------------------

def _divmod(n: Poly1, d: Poly1) -> Tuple[Poly1, Poly1]:
    if d.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    quotient = [Fraction(0)] * max(n.degree - d.degree + 1, 0)
    remainder = list(n.coeffs)
    lead = d.coeffs[-1]
    while len(remainder) - 1 >= d.degree and any(remainder):
        shift = len(remainder) - 1 - d.degree
        factor = remainder[-1] / lead
        quotient[shift] = factor
        for i, c in enumerate(d.coeffs):
            remainder[i + shift] -= factor * c
        while remainder and remainder[-1] == 0:
            remainder.pop()
    return Poly1(tuple(quotient)), Poly1(tuple(remainder))


def _monic(p: Poly1) -> Poly1:
    return p / p.coeffs[-1] if not p.is_zero() else p


def _gcd(p: Poly1, q: Poly1) -> Poly1:
    while not q.is_zero():
        p, q = q, _divmod(p, q)[1]
    return _monic(p)


def _exact_div(n: Poly1, d: Poly1) -> Poly1:
    quotient, remainder = _divmod(n, d)
    if not remainder.is_zero():
        raise FactorizationMismatch(f"{d} does not divide {n}")
    return quotient


def square_free_decomposition(p: Poly1) -> List[Tuple[Poly1, int]]:
    """Yun's algorithm: monic p = prod q_i^i with q_i square-free and coprime."""
    if p.degree <= 0:
        return []
    p = _monic(p)
    a = _gcd(p, p.derivative())
    b = _exact_div(p, a)
    c = _exact_div(p.derivative(), a)
    d = c - b.derivative()
    factors = []
    i = 1
    while b.degree > 0:
        a = _gcd(b, d)
        b, c = _exact_div(b, a), _exact_div(d, a)
        d = c - b.derivative()
        if a.degree > 0:
            factors.append((a, i))
        i += 1
    return factors


def distinct_root_count(p: Poly1) -> int:
    """Number of distinct complex roots of a nonzero polynomial."""
    return p.degree - _gcd(p, p.derivative()).degree if p.degree > 0 else 0


# -- branch divisor ----------------------------------------------------------------

U_FORM = BinaryForm(1, (0, 1))
V_FORM = BinaryForm(1, (1, 0))


@dataclass(frozen=True)
class BranchDivisor:
    """Delta(u, v) = unit * prod factor^multiplicity, and its distinct points in P1."""

    form: BinaryForm
    unit: Fraction
    factors: Tuple[Tuple[BinaryForm, int], ...]
    distinct_count: int


def branch_divisor_of_pencil(f: BinaryForm, g: BinaryForm) -> BranchDivisor:
    """Branch points of [x:y] -> [u:v] on the curve u f = v g."""
    p = pencil_discriminant(f, g)
    if p.is_zero():
        raise IdenticallyZero(f"every member of the pencil ({f}, {g}) has a repeated root")
    form = BinaryForm(4, tuple(p.coefficient(i) for i in range(5)))

    at_zero = next(i for i, c in enumerate(p.coeffs) if c != 0)
    at_infinity = 4 - p.degree
    rest = Poly1(p.coeffs[at_zero:])
    unit = rest.coeffs[-1]

    factors: List[Tuple[BinaryForm, int]] = []
    if at_zero:
        factors.append((U_FORM, at_zero))
    if at_infinity:
        factors.append((V_FORM, at_infinity))
    distinct = int(bool(at_zero)) + int(bool(at_infinity))
    for q, multiplicity in square_free_decomposition(rest):
        factors.append((BinaryForm(q.degree, q.coeffs), multiplicity))
        distinct += q.degree
    return BranchDivisor(form, unit, tuple(factors), distinct)


def branch_divisor(lam: RationalLike) -> BranchDivisor:
    """Delta(u, v) = uv[4l^3 u^2 + (l^4 + 18l^2 - 27)uv + 4l^3 v^2] for the curve at l."""
    f, g = star_forms(as_rational(lam))
    return branch_divisor_of_pencil(f, g)


# -- classification ----------------------------------------------------------------

class CurveClassification(str, Enum):
    SMOOTH_FOUR_BRANCH = "SmoothFourBranch"
    SINGULAR_CURVE = "SingularCurve"
    DEGENERATE_BRANCH = "DegenerateBranch"
    TOTALLY_DEGENERATE = "TotallyDegenerate"


@dataclass(frozen=True)
class LambdaClass:
    value: Fraction
    classification: CurveClassification
    resultant: Fraction
    distinct_count: int


def classify_pencil(f: BinaryForm, g: BinaryForm) -> Tuple[CurveClassification, Fraction, int]:
    """(classification, resultant, number of branch points) for any cubic pencil."""
    resultant = resultant_cubics(f, g)
    try:
        branch = branch_divisor_of_pencil(f, g)
    except IdenticallyZero:
        return CurveClassification.TOTALLY_DEGENERATE, resultant, 0
    if resultant == 0:
        return CurveClassification.SINGULAR_CURVE, resultant, branch.distinct_count
    if branch.distinct_count < 4:
        return CurveClassification.DEGENERATE_BRANCH, resultant, branch.distinct_count
    return CurveClassification.SMOOTH_FOUR_BRANCH, resultant, branch.distinct_count


@lru_cache(maxsize=None)
def star_resultant() -> Poly1:
    """Res(f, g) of the (x^3 + l x^2 y, y^3 + l x y^2) pencil as a polynomial in l."""
    return Poly1._coerce(resultant_cubics(*star_forms(X)))


def classify_lambda(lam: RationalLike) -> LambdaClass:
    lam = as_rational(lam)
    resultant = star_resultant()(lam)
    branch = branch_divisor(lam)
    if resultant == 0:
        classification = CurveClassification.SINGULAR_CURVE
    elif branch.distinct_count < 4:
        classification = CurveClassification.DEGENERATE_BRANCH
    else:
        classification = CurveClassification.SMOOTH_FOUR_BRANCH
    return LambdaClass(lam, classification, resultant, branch.distinct_count)


def exceptional_lambdas(bound: int = 50) -> List[Fraction]:
    """Every rational p/q with |p|, q <= bound whose curve is not SmoothFourBranch."""
    seen = {Fraction(p, q) for p in range(-bound, bound + 1) for q in range(1, bound + 1)}
    exceptional = sorted(
        lam for lam in seen
        if classify_lambda(lam).classification != CurveClassification.SMOOTH_FOUR_BRANCH
    )
    logger.debug(f"searched {len(seen)} values of lambda, exceptional: {exceptional}")
    return exceptional


# -- certificate -------------------------------------------------------------------

CLAIMED_FACTORS: Tuple[Tuple[Poly1, int], ...] = (
    (Poly1((-1, 0, 1)), 1),
    (Poly1((-9, 0, 1)), 3),
)


@dataclass(frozen=True)
class BranchCertificate:
    """Discriminant of the quadratic factor of Delta / uv, as a polynomial in l."""

    quadratic: Tuple[Poly1, Poly1, Poly1]
    polynomial: Poly1
    factors: Tuple[Tuple[Poly1, int], ...]

    def in_square(self) -> Poly1:
        """The certificate rewritten in t = l^2."""
        if any(c != 0 for c in self.polynomial.coeffs[1::2]):
            raise FactorizationMismatch("certificate is not even in lambda")
        return Poly1(self.polynomial.coeffs[0::2])


@lru_cache(maxsize=None)
def branch_certificate() -> BranchCertificate:
    """Derive Delta/uv = A u^2 + B uv + C v^2 over Q[l] and verify B^2 - 4AC.

    A, B, C are solved from Delta at s = u/v in {1, -1, 2}; s = 0 and s = 3
    confirm the factor uv and the quadratic shape.
    """
    f, g = star_forms(X)

    def delta_at(s: int) -> Poly1:
        member = BinaryForm(3, tuple(s * fc - gc for fc, gc in zip(f.coeffs, g.coeffs)))
        return Poly1._coerce(cubic_discriminant(member))

    if not delta_at(0).is_zero():
        raise FactorizationMismatch("Delta does not vanish at [0:1]")
    A, B, C = solve_linear(
        [[1, 1, 1], [1, -1, 1], [4, 2, 1]],
        [delta_at(1), -delta_at(-1), delta_at(2) / 2],
    )
    if delta_at(3) != (9 * A + 3 * B + C) * 3:
        raise FactorizationMismatch("Delta / uv is not quadratic in (u, v)")

    certificate = B * B - 4 * A * C
    expanded = Poly1((1,))
    for factor, power in CLAIMED_FACTORS:
        expanded = expanded * factor ** power
    if expanded != certificate:
        raise FactorizationMismatch(f"{certificate} != {expanded}")
    return BranchCertificate((A, B, C), certificate, CLAIMED_FACTORS)


def certificate_at_square(t: RationalLike) -> Fraction:
    """Certificate value at l^2 = t (covers irrational l such as sqrt(3))."""
    return branch_certificate().in_square()(as_rational(t))
