"""Flag invariants S(W^S; Z) and S(W^{S,l}; Z) by exact chamber sweeps.

For fixed rational u the family P(u)|_S - vZ is cut into v-chambers on which
the Zariski support is constant; inside a chamber the positive part is affine
in v, so the volume is a quadratic in v. The inner integral in v is then a
polynomial in u on each table piece, recovered by verified interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from loguru import logger

from engine.errors import (
    BreakpointRefinementExceeded,
    NotPseudoEffective,
    Unbounded,
    VerificationFailed,
)
from engine.exact_core import (
    Poly1,
    PiecewisePoly,
    RationalLike,
    as_rational,
    format_rational,
    integrate_poly,
    interpolate_verified,
    piecewise_integrate,
    rational_roots,
)
from engine.surface_lattice import (
    DivisorClass,
    SurfaceLattice,
    ZariskiFamily,
    in_effective_cone,
    volume,
    zariski,
    zariski_germ,
)
from engine.threefold_ring import NakayamaTable, RestrictionMap, restrict, triple

MAX_CHAMBERS = 64
DEFAULT_REFINEMENT_DEPTH = 8


@dataclass(frozen=True)
class FlagCase:
    """A surface S, a curve class Z on it and the incidence data of a flag.

    ``n_multiplicity`` gives ord_Z(N(u)|_S) as a combination of the table's
    negative terms; it is non-empty only when Z is a component of N(u)|_S.
    For point invariants ``flag_curve`` names the curve l, ``curve_multiplicity``
    the multiplicity of the point on each listed curve and
    ``n_prime_multiplicity`` its multiplicity on each N(u)|_S component.
    """

    name: str
    table: NakayamaTable
    restriction: RestrictionMap
    z_class: DivisorClass
    z_label: str = "Z"
    n_multiplicity: Mapping[str, int] = field(default_factory=dict)
    flag_curve: Optional[str] = None
    curve_multiplicity: Mapping[str, int] = field(default_factory=dict)
    n_prime_multiplicity: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        surface = self.restriction.surface
        surface._owns(self.z_class)
        for data in (self.n_multiplicity, self.curve_multiplicity, self.n_prime_multiplicity):
            for label, mult in data.items():
                if not isinstance(mult, int) or mult < 0:
                    raise ValueError(f"{self.name}: multiplicity of {label} must be a nonnegative integer")
        for label in self.curve_multiplicity:
            surface.curve_index(label)
        if self.flag_curve is not None:
            surface.curve_index(self.flag_curve)
        if not in_effective_cone(surface, self.z_class):
            raise ValueError(f"{self.name}: {self.z_label} is not effective on {surface.name}")

    @property
    def surface(self) -> SurfaceLattice:
        return self.restriction.surface


@dataclass(frozen=True)
class Chamber:
    lo: Fraction
    hi: Fraction
    support: Tuple[str, ...]
    vol_poly: Poly1
    positive: Tuple[Poly1, ...]
    negative: Dict[str, Poly1]
    p_dot_poly: Optional[Poly1] = None
    n_ord_poly: Optional[Poly1] = None


@dataclass(frozen=True)
class ChamberSlice:
    u: Fraction
    chambers: Tuple[Chamber, ...]

    @property
    def pseff_limit(self) -> Fraction:
        return self.chambers[-1].hi if self.chambers else Fraction(0)

    def volume_function(self) -> PiecewisePoly:
        return PiecewisePoly.from_pieces((c.lo, c.hi, c.vol_poly) for c in self.chambers)

    def integrand_function(self, integrand: Callable[[Chamber], Poly1]) -> PiecewisePoly:
        """Per-chamber integrand in v; products with N-coefficients may jump at chamber walls."""
        return PiecewisePoly.from_pieces(((c.lo, c.hi, integrand(c)) for c in self.chambers), allow_jumps=True)

    def integrate(self, integrand: Callable[[Chamber], Poly1]) -> Fraction:
        return piecewise_integrate(self.integrand_function(integrand))

    def summary(self) -> List[Dict[str, str]]:
        rows = []
        for c in self.chambers:
            row = {
                "v_lo": format_rational(c.lo),
                "v_hi": format_rational(c.hi),
                "support": ", ".join(c.support) or "-",
                "vol": str(c.vol_poly),
            }
            if c.p_dot_poly is not None:
                row["p_dot"] = str(c.p_dot_poly)
                row["n_ord"] = str(c.n_ord_poly)
            rows.append(row)
        return rows


def _interior(lo: Fraction, hi: Fraction, k: int, parts: int) -> Fraction:
    return lo + (hi - lo) * k / parts


def _build_chamber(
    case: FlagCase, D: DivisorClass, family: ZariskiFamily, lo: Fraction, hi: Fraction
) -> Chamber:
    L = case.surface
    Z = case.z_class
    positive = family.positive
    symbolic = Poly1._coerce(L.pair(positive, positive))

    labels = tuple(L.negative_curves[i].label for i, a in family.negative if not a.is_zero())
    for k in (2, 3):
        v = _interior(lo, hi, k, 5)
        pointwise = zariski(L, D - Z * v)
        found = tuple(L.negative_curves[i].label for i in pointwise.support)
        if found != labels:
            raise VerificationFailed(
                f"{case.name}: support {found} at v = {format_rational(v)} differs from chamber support {labels}"
            )

    points = [_interior(lo, hi, k, 5) for k in (1, 2, 3, 4)]
    values = [volume(L, D - Z * v) for v in points]
    interpolated = interpolate_verified(list(zip(points[:3], values[:3])), 2, [(points[3], values[3])])
    if interpolated != symbolic:
        raise VerificationFailed(f"{case.name}: chamber volume {interpolated} disagrees with P^2 = {symbolic}")

    negative = {L.negative_curves[i].label: a for i, a in family.negative if not a.is_zero()}
    p_dot_poly = n_ord_poly = None
    if case.flag_curve is not None:
        curve = L.curve(case.flag_curve)
        p_dot_poly = Poly1._coerce(L.pair(positive, curve.coeffs))
        n_ord_poly = Poly1()
        for label, coefficient in negative.items():
            if label != case.flag_curve:
                n_ord_poly = n_ord_poly + coefficient * case.curve_multiplicity.get(label, 0)

    return Chamber(
        lo=lo,
        hi=hi,
        support=labels,
        vol_poly=symbolic,
        positive=positive,
        negative=negative,
        p_dot_poly=p_dot_poly,
        n_ord_poly=n_ord_poly,
    )


def chamber_sweep(case: FlagCase, u: RationalLike) -> ChamberSlice:
    """Chambers of v -> P(u)|_S - vZ from v = 0 to the pseudo-effective limit."""
    u = as_rational(u)
    L = case.surface
    D = restrict(case.restriction, case.table.positive_at(u))

    chambers: List[Chamber] = []
    v = Fraction(0)
    while True:
        try:
            family = zariski_germ(L, D, case.z_class, v)
        except NotPseudoEffective:
            break
        if family.upper is None:
            raise Unbounded(f"{case.name}: {D} - v{case.z_label} is pseudo-effective for all v at u = {format_rational(u)}")
        chambers.append(_build_chamber(case, D, family, v, family.upper))
        logger.debug(
            f"{case.name} u={format_rational(u)}: chamber [{format_rational(v)}, "
            f"{format_rational(family.upper)}] support {chambers[-1].support}"
        )
        v = family.upper
        if len(chambers) > MAX_CHAMBERS:
            raise VerificationFailed(f"{case.name}: more than {MAX_CHAMBERS} chambers at u = {format_rational(u)}")

    if chambers and chambers[-1].vol_poly(chambers[-1].hi) != 0:
        last = chambers[-1]
        roots = [r for r in rational_roots(last.vol_poly) if last.lo < r < last.hi]
        if not roots:
            raise VerificationFailed(
                f"{case.name}: volume {last.vol_poly} does not vanish at v = {format_rational(last.hi)}"
            )
        logger.debug(f"{case.name}: volume vanishes early at v = {format_rational(roots[0])}")
        chambers[-1] = Chamber(
            last.lo, roots[0], last.support, last.vol_poly, last.positive, last.negative,
            last.p_dot_poly, last.n_ord_poly,
        )

    return ChamberSlice(u, tuple(chambers))


def integrate_in_u(
    inner: Callable[[Fraction], Fraction],
    lo: RationalLike,
    hi: RationalLike,
    degree: int = 3,
    refinement_depth: int = DEFAULT_REFINEMENT_DEPTH,
) -> Fraction:
    """Integral of a piecewise polynomial known only through exact evaluations.

    Each interval is interpolated at ``degree + 1`` equally spaced nodes, both
    endpoints included, and checked at the midpoint of every gap between nodes
    and at a quarter step in from each end; a failed check bisects the interval.
    ``inner`` must be continuous on [lo, hi].
    """
    if degree < 1:
        raise ValueError(f"interpolation degree must be at least 1, got {degree}")
    lo, hi = as_rational(lo), as_rational(hi)

    def piece(a: Fraction, b: Fraction, level: int) -> Fraction:
        nodes = [_interior(a, b, k, degree) for k in range(degree + 1)]
        checks = [_interior(a, b, 2 * k + 1, 2 * degree) for k in range(degree)]
        checks += [_interior(a, b, 1, 4 * degree), _interior(a, b, 4 * degree - 1, 4 * degree)]
        try:
            poly = interpolate_verified(
                [(x, inner(x)) for x in nodes], degree, [(x, inner(x)) for x in checks]
            )
        except VerificationFailed:
            if level >= refinement_depth:
                raise BreakpointRefinementExceeded(
                    f"no polynomial of degree {degree} fits on [{format_rational(a)}, {format_rational(b)}]"
                )
            mid = (a + b) / 2
            logger.debug(f"refining at u = {format_rational(mid)} (level {level + 1})")
            return piece(a, mid, level + 1) + piece(mid, b, level + 1)
        return integrate_poly(poly, a, b)

    if lo == hi:
        return Fraction(0)
    return piece(lo, hi, 0)


@dataclass(frozen=True)
class PieceValue:
    lo: Fraction
    hi: Fraction
    value: Fraction


@dataclass(frozen=True)
class CurveBreakdown:
    pieces: Tuple[PieceValue, ...]
    correction: Fraction
    total: Fraction


def _ord_along(table: NakayamaTable, multiplicity: Mapping[str, int], piece_index: int) -> Poly1:
    ord_poly = Poly1()
    for term in table.pieces[piece_index].negative:
        ord_poly = ord_poly + term.coefficient * multiplicity.get(term.label, 0)
    return ord_poly


def s_curve_breakdown(case: FlagCase, refinement_depth: int = DEFAULT_REFINEMENT_DEPTH) -> CurveBreakdown:
    """Per-piece double integrals, the N-part correction and their total."""
    table = case.table
    scale = Fraction(3) / table.form.anticanonical_degree
    S = case.restriction.divisor

    pieces = []
    for piece in table.pieces:
        inner = lambda u: chamber_sweep(case, u).integrate(lambda c: c.vol_poly)
        value = scale * integrate_in_u(inner, piece.lo, piece.hi, 3, refinement_depth)
        pieces.append(PieceValue(piece.lo, piece.hi, value))

    correction = Fraction(0)
    if case.n_multiplicity:
        for index, piece in enumerate(table.pieces):
            ord_poly = _ord_along(table, case.n_multiplicity, index)
            if ord_poly.is_zero():
                continue
            weight = Poly1._coerce(triple(table.form, piece.positive, piece.positive, S))
            correction += integrate_poly(weight * ord_poly, piece.lo, piece.hi)
        correction *= scale

    total = correction + sum((p.value for p in pieces), Fraction(0))
    logger.debug(f"{case.name}: pieces {[format_rational(p.value) for p in pieces]}, correction {format_rational(correction)}")
    return CurveBreakdown(tuple(pieces), correction, total)


def s_curve(case: FlagCase, refinement_depth: int = DEFAULT_REFINEMENT_DEPTH) -> Fraction:
    """S(W^S; Z) = (3/(-K)^3)[int P^2.S ord_Z(N|_S) du + int int vol(P(u)|_S - vZ) dv du]."""
    return s_curve_breakdown(case, refinement_depth).total


@dataclass(frozen=True)
class PointBreakdown:
    f_term: Fraction
    integral_term: Fraction
    total: Fraction
    pieces: Tuple[Tuple[Fraction, Fraction, Fraction, Fraction], ...] = ()


def s_point(case: FlagCase, refinement_depth: int = DEFAULT_REFINEMENT_DEPTH) -> PointBreakdown:
    """S(W^{S,l}; Z) split into the incidence term F_Z and the (P.l)^2 integral."""
    if case.flag_curve is None:
        raise ValueError(f"{case.name}: point invariants need a flag curve")
    table = case.table
    degree = table.form.anticanonical_degree
    slices: Dict[Fraction, ChamberSlice] = {}

    def sweep(u: Fraction) -> ChamberSlice:
        if u not in slices:
            slices[u] = chamber_sweep(case, u)
        return slices[u]

    def n_prime(u: Fraction) -> Fraction:
        negative = table.negative_at(u)
        return sum(
            (negative.get(label, Fraction(0)) * mult for label, mult in case.n_prime_multiplicity.items()),
            Fraction(0),
        )

    def f_inner(u: Fraction) -> Fraction:
        offset = n_prime(u)
        return sweep(u).integrate(lambda c: c.p_dot_poly * (c.n_ord_poly + offset))

    def square_inner(u: Fraction) -> Fraction:
        return sweep(u).integrate(lambda c: c.p_dot_poly * c.p_dot_poly)

    f_term = integral_term = Fraction(0)
    pieces = []
    for piece in table.pieces:
        f_value = Fraction(6) / degree * integrate_in_u(f_inner, piece.lo, piece.hi, 3, refinement_depth)
        s_value = Fraction(3) / degree * integrate_in_u(square_inner, piece.lo, piece.hi, 3, refinement_depth)
        pieces.append((piece.lo, piece.hi, f_value, s_value))
        f_term += f_value
        integral_term += s_value

    return PointBreakdown(f_term, integral_term, f_term + integral_term, tuple(pieces))
