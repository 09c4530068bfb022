"""Independent sympy evaluations of the derived values.

Nothing here touches the chamber machinery: every integrand is written out
by hand as a polynomial in (u, v) over explicitly listed regions, and sympy
integrates it. The verifier compares these against the expected table.
"""

from fractions import Fraction
from typing import Callable, Dict, List, Sequence, Tuple, Union

import sympy as sp

u, v, lam, t = sp.symbols("u v lam t")
h, e = sp.symbols("h e")

TENSOR = {3: 1, 2: 0, 1: -4, 0: -14}  # keyed by the power of h

Region = Tuple[sp.Expr, sp.Expr, sp.Expr, sp.Expr, sp.Expr]  # (integrand, u_lo, u_hi, v_lo, v_hi)
OracleValue = Union[Fraction, List[Fraction]]


def to_fraction(value: sp.Expr) -> Fraction:
    value = sp.nsimplify(value)
    if not value.is_Rational:
        raise ValueError(f"oracle produced a non-rational value {value}")
    return Fraction(int(value.p), int(value.q))


def threefold_cube(a: sp.Expr, b: sp.Expr) -> sp.Expr:
    """(aH + bE)^3 expanded and reduced with the intersection numbers."""
    poly = sp.Poly(sp.expand((a * h + b * e) ** 3), h, e)
    return sp.expand(sum(c * TENSOR[m[0]] for m, c in zip(poly.monoms(), poly.coeffs())))


def _s_divisor(pieces: Sequence[Tuple[sp.Expr, sp.Expr, int, int]]) -> Fraction:
    total = sum(sp.integrate(threefold_cube(a, b), (u, lo, hi)) for a, b, lo, hi in pieces)
    return to_fraction(total / 30)


def _double(regions: Sequence[Region], scale: sp.Expr = sp.Rational(3, 30)) -> Fraction:
    total = 0
    for integrand, u_lo, u_hi, v_lo, v_hi in regions:
        total += sp.integrate(sp.integrate(sp.expand(integrand), (v, v_lo, v_hi)), (u, u_lo, u_hi))
    return to_fraction(scale * total)


# -- S_X -------------------------------------------------------------------------

def sx_h() -> Fraction:
    return _s_divisor([(4 - u, -1, 0, 1), (3 * (2 - u), -(2 - u), 1, 2)])


def sx_qtilde() -> Fraction:
    return _s_divisor([(4 - 2 * u, u - 1, 0, 1), (4 - 2 * u, 0, 1, 2)])


def sx_e() -> Fraction:
    return _s_divisor([(4, -(1 + u), 0, sp.Rational(1, 3)), (3 * (2 - 2 * u), -(2 - 2 * u), sp.Rational(1, 3), 1)])


# -- surfaces in Q~ and E ------------------------------------------------------------

def quadric_e_cap_q() -> Fraction:
    return _double([
        (2 * (3 - u - v) * (1 + u - 3 * v), 0, 1, 0, (1 + u) / 3),
        (2 * (4 - 2 * u - v) * (4 - 2 * u - 3 * v), 1, 2, 0, (4 - 2 * u) / 3),
    ]) + quadric_correction()


def quadric_correction() -> Fraction:
    return to_fraction(sp.Rational(3, 30) * sp.integrate(2 * (4 - 2 * u) ** 2 * (u - 1), (u, 1, 2)))


def quadric_diagonal() -> Fraction:
    return _double([
        (2 * (3 - u - v) * (1 + u - v), 0, 1, 0, 1 + u),
        (2 * (4 - 2 * u - v) ** 2, 1, 2, 0, 4 - 2 * u),
    ])


def _hirzebruch_volume(n: int, a: sp.Expr, b: sp.Expr) -> sp.Expr:
    """(a s + b l)^2 on F_n."""
    return sp.expand(-n * a ** 2 + 2 * a * b)


def exceptional_n0() -> Fraction:
    return _double([
        (_hirzebruch_volume(0, 1 + u - v, 9 - 7 * u), 0, sp.Rational(1, 3), 0, 1 + u),
        (_hirzebruch_volume(0, 2 - 2 * u - v, 10 - 10 * u), sp.Rational(1, 3), 1, 0, 2 - 2 * u),
    ])


def exceptional_n2() -> Fraction:
    return _double([
        (_hirzebruch_volume(2, 1 + u - v, 10 - 6 * u), 0, sp.Rational(1, 3), 0, 1 + u),
        (_hirzebruch_volume(2, 2 - 2 * u - v, 12 - 12 * u), sp.Rational(1, 3), 1, 0, 2 - 2 * u),
    ])


# -- quintic del Pezzo in H ------------------------------------------------------------

L12_LOWER: List[Region] = [
    ((4 - u - v) ** 2 - 2 * (1 - v) ** 2 - 2, 0, 1, 0, 1),
    ((4 - u - v) ** 2 - 2, 0, 1, 1, 2 - u),
    (2 * (3 - u - v) ** 2, 0, 1, 2 - u, 3 - u),
]
L12_UPPER: List[Region] = [
    ((6 - 3 * u - v) ** 2 - 2 * (2 - u - v) ** 2 - 2 * (2 - u) ** 2, 1, 2, 0, 2 - u),
    (2 * (4 - 2 * u - v) ** 2, 1, 2, 2 - u, 4 - 2 * u),
]

# P(u, v).l12 on the same regions
L12_DOT: List[Region] = [
    (2 - u + v, 0, 1, 0, 1),
    (4 - u - v, 0, 1, 1, 2 - u),
    (2 * (3 - u - v), 0, 1, 2 - u, 3 - u),
    (2 - u + v, 1, 2, 0, 2 - u),
    (2 * (4 - 2 * u - v), 1, 2, 2 - u, 4 - 2 * u),
]
# coefficient of l34 in N(u, v) on the same regions
L34_COEFFICIENT = [0, 0, v - 2 + u, 0, v - 2 + u]


def l12_lower() -> Fraction:
    return _double(L12_LOWER)


def l12_upper() -> Fraction:
    return _double(L12_UPPER)


def l12_total() -> Fraction:
    return _double(L12_LOWER + L12_UPPER)


def point_integral() -> Fraction:
    return _double([(dot ** 2, *bounds) for dot, *bounds in L12_DOT])


def point_incidence() -> Fraction:
    regions = [(dot * coefficient, *bounds) for (dot, *bounds), coefficient in zip(L12_DOT, L34_COEFFICIENT)]
    return _double(regions, sp.Rational(6, 30))


def conic_h4() -> Fraction:
    return _double([
        ((4 - u - 2 * v) ** 2 - 4 * (1 - v) ** 2, 0, 1, 0, 1),
        ((4 - u - 2 * v) ** 2, 0, 1, 1, (4 - u) / 2),
        ((6 - 3 * u - 2 * v) ** 2 - 4 * (2 - u - v) ** 2, 1, 2, 0, 2 - u),
        ((6 - 3 * u - 2 * v) ** 2, 1, 2, 2 - u, (6 - 3 * u) / 2),
    ])


def conic_h4_display() -> Fraction:
    """The conic integrand as displayed, with -4(1-v) and -4(2-u-v) left unsquared."""
    return _double([
        ((4 - u - 2 * v) ** 2 - 4 * (1 - v), 0, 1, 0, 1),
        ((4 - u - 2 * v) ** 2, 0, 1, 1, (4 - u) / 2),
        ((6 - 3 * u - 2 * v) ** 2 - 4 * (2 - u - v), 1, 2, 0, 2 - u),
        ((6 - 3 * u - 2 * v) ** 2, 1, 2, 2 - u, (6 - 3 * u) / 2),
    ])


# -- quartic curve ---------------------------------------------------------------------

def _coefficients(expr: sp.Expr, symbol: sp.Symbol) -> List[Fraction]:
    """Ascending coefficient list."""
    return [to_fraction(c) for c in reversed(sp.Poly(sp.expand(expr), symbol).all_coeffs())]


def star_resultant() -> List[Fraction]:
    rows = [[1, lam, 0, 0, 0, 0], [0, 1, lam, 0, 0, 0], [0, 0, 1, lam, 0, 0],
            [0, 0, lam, 1, 0, 0], [0, 0, 0, lam, 1, 0], [0, 0, 0, 0, lam, 1]]
    return _coefficients(sp.Matrix(rows).det(), lam)


def certificate_expansion() -> List[Fraction]:
    return _coefficients((lam ** 2 - 1) * (lam ** 2 - 9) ** 3, lam)


def certificate_factorization() -> List[Fraction]:
    certificate = (lam ** 4 + 18 * lam ** 2 - 27) ** 2 - 64 * lam ** 6
    factored = sp.factor(certificate)
    if sp.expand(factored - (lam - 1) * (lam + 1) * (lam - 3) ** 3 * (lam + 3) ** 3) != 0:
        raise ValueError(f"unexpected factorization {factored}")
    return _coefficients(certificate, lam)


def certificate_at_three() -> Fraction:
    return to_fraction(((t ** 2 + 18 * t - 27) ** 2 - 64 * t ** 3).subs(t, 3))


def thresholds_from_cone() -> List[Fraction]:
    """pseff thresholds of Q~, E, H from cone coordinates x E + y (2H - E)."""
    x, y, mu = sp.symbols("x y mu")
    values = []
    for s_h, s_e in ((2, -1), (0, 1), (1, 0)):
        D_h, D_e = 4 - mu * s_h, -1 - mu * s_e
        coords = sp.solve([sp.Eq(2 * y, D_h), sp.Eq(x - y, D_e)], [x, y])
        roots = [sp.solve(c, mu)[0] for c in coords.values() if c.has(mu)]
        values.append(to_fraction(min(r for r in roots if r > 0)))
    return values


ORACLES: Dict[str, Callable[[], OracleValue]] = {
    "tensor-cube-anticanonical": lambda: to_fraction(threefold_cube(4, -1)),
    "tensor-cube-v5": lambda: to_fraction(threefold_cube(3, -1)),
    "antiderivative-sx-h": sx_h,
    "antiderivative-sx-qtilde": sx_qtilde,
    "antiderivative-sx-e": sx_e,
    "direct-quadric-e-cap-q": quadric_e_cap_q,
    "direct-quadric-correction": quadric_correction,
    "direct-quadric-diagonal": quadric_diagonal,
    "direct-hirzebruch-n0": exceptional_n0,
    "direct-hirzebruch-n2": exceptional_n2,
    "direct-l12-lower": l12_lower,
    "direct-l12-upper": l12_upper,
    "direct-l12-total": l12_total,
    "direct-point-integral": point_integral,
    "direct-point-incidence": point_incidence,
    "direct-conic-h4": conic_h4,
    "display-conic-h4": conic_h4_display,
    "sylvester-star-resultant": star_resultant,
    "expand-certificate": certificate_expansion,
    "factor-certificate": certificate_factorization,
    "certificate-at-three": certificate_at_three,
    "cone-thresholds": thresholds_from_cone,
}


def run_oracle(name: str) -> OracleValue:
    if name not in ORACLES:
        raise KeyError(f"unknown oracle {name!r}")
    return ORACLES[name]()
