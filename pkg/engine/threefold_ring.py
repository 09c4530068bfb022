"""Intersection ring of the blow-up X of P3 along a twisted quartic.

Classes are hH + eE. Coefficients are Fractions, or Poly1 in u for the
families -K_X - uS and the positive/negative parts of their Nakayama tables.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger

from engine.errors import TableInvalid, Unbounded
from engine.exact_core import (
    Poly1,
    PiecewisePoly,
    RationalLike,
    as_rational,
    format_rational,
    piecewise_integrate,
    solve_linear,
)
from engine.surface_lattice import (
    DivisorClass,
    SurfaceKind,
    SurfaceLattice,
    intersect,
    is_nef,
    make_surface,
)

Coefficient = Union[Fraction, Poly1]


def _coefficient(value: Any) -> Coefficient:
    if isinstance(value, Poly1):
        return value
    return as_rational(value)


def _at(value: Coefficient, u: Fraction) -> Fraction:
    return value(u) if isinstance(value, Poly1) else value


def _poly(value: Coefficient) -> Poly1:
    return value if isinstance(value, Poly1) else Poly1((value,))


@dataclass(frozen=True)
class ThreefoldClass:
    """hH + eE."""

    h: Coefficient = Fraction(0)
    e: Coefficient = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", _coefficient(self.h))
        object.__setattr__(self, "e", _coefficient(self.e))

    @property
    def is_family(self) -> bool:
        return isinstance(self.h, Poly1) or isinstance(self.e, Poly1)

    def at(self, u: RationalLike) -> "ThreefoldClass":
        u = as_rational(u)
        return ThreefoldClass(_at(self.h, u), _at(self.e, u))

    def __add__(self, other: "ThreefoldClass") -> "ThreefoldClass":
        return ThreefoldClass(self.h + other.h, self.e + other.e)

    def __sub__(self, other: "ThreefoldClass") -> "ThreefoldClass":
        return ThreefoldClass(self.h - other.h, self.e - other.e)

    def __neg__(self) -> "ThreefoldClass":
        return ThreefoldClass(-self.h, -self.e)

    def __mul__(self, factor: Any) -> "ThreefoldClass":
        factor = _coefficient(factor)
        return ThreefoldClass(self.h * factor, self.e * factor)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ThreefoldClass):
            return NotImplemented
        return _poly(self.h) == _poly(other.h) and _poly(self.e) == _poly(other.e)

    def __hash__(self) -> int:
        return hash((_poly(self.h), _poly(self.e)))

    def __str__(self) -> str:
        def show(c: Coefficient) -> str:
            return f"({c})" if isinstance(c, Poly1) else format_rational(c)
        return f"{show(self.h)}H + {show(self.e)}E"


H = ThreefoldClass(1, 0)
E = ThreefoldClass(0, 1)
QTILDE = ThreefoldClass(2, -1)
ANTICANONICAL = ThreefoldClass(4, -1)
V5_PULLBACK = ThreefoldClass(3, -1)
U = Poly1.variable()


@dataclass(frozen=True)
class TripleForm:
    """Symmetric triple intersection numbers (H^3, H^2E, HE^2, E^3).

    Also carries the two generators of the effective cone and of the nef
    cone, which are data of the threefold and not derived here.
    """

    tensor: Tuple[Fraction, Fraction, Fraction, Fraction]
    anticanonical: ThreefoldClass = ANTICANONICAL
    effective_cone: Tuple[ThreefoldClass, ThreefoldClass] = (E, QTILDE)
    nef_cone: Tuple[ThreefoldClass, ThreefoldClass] = (H, V5_PULLBACK)

    def __post_init__(self) -> None:
        object.__setattr__(self, "tensor", tuple(as_rational(t) for t in self.tensor))
        if len(self.tensor) != 4:
            raise ValueError("a triple form on (H, E) has four independent values")

    @classmethod
    def fano222(cls) -> "TripleForm":
        """H^3 = 1, H^2E = 0, HE^2 = -deg C = -4, E^3 = -c1(N) = -14."""
        return cls((Fraction(1), Fraction(0), Fraction(-4), Fraction(-14)))

    @property
    def anticanonical_degree(self) -> Fraction:
        return triple(self, self.anticanonical, self.anticanonical, self.anticanonical)


def triple(f: TripleForm, A: ThreefoldClass, B: ThreefoldClass, C: ThreefoldClass) -> Any:
    """Trilinear product A.B.C; a Poly1 in u when any factor is a family."""
    total: Any = Fraction(0)
    for (i, a), (j, b), (k, c) in itertools.product(
        enumerate((A.h, A.e)), enumerate((B.h, B.e)), enumerate((C.h, C.e))
    ):
        value = f.tensor[i + j + k]
        if value != 0:
            total = total + a * b * c * value
    return total


def cube(f: TripleForm, D: ThreefoldClass) -> Any:
    return triple(f, D, D, D)


def _cone_coordinates(D: ThreefoldClass, generators: Sequence[ThreefoldClass]) -> List[Fraction]:
    g1, g2 = generators
    return solve_linear([[g1.h, g2.h], [g1.e, g2.e]], [D.h, D.e])


def _cone_threshold(base: ThreefoldClass, S: ThreefoldClass, generators: Sequence[ThreefoldClass]) -> Fraction:
    if S.is_family or (S.h == 0 and S.e == 0):
        raise Unbounded(f"threshold along {S} is not defined")
    start = _cone_coordinates(base, generators)
    if any(c < 0 for c in start):
        raise ValueError(f"{base} is outside the cone spanned by {[str(g) for g in generators]}")
    step = _cone_coordinates(S, generators)
    bounds = [c / s for c, s in zip(start, step) if s > 0]
    if not bounds:
        raise Unbounded(f"{base} - u({S}) stays in the cone for all u >= 0")
    return min(bounds)


def pseff_threshold(S: ThreefoldClass, form: Optional[TripleForm] = None) -> Fraction:
    """Largest u with -K_X - uS pseudo-effective."""
    form = form or TripleForm.fano222()
    coords = _cone_coordinates(S, form.effective_cone)
    if any(c < 0 for c in coords):
        raise ValueError(f"{S} is not effective")
    return _cone_threshold(form.anticanonical, S, form.effective_cone)


def nef_threshold(S: ThreefoldClass, form: Optional[TripleForm] = None) -> Fraction:
    """Largest u with -K_X - uS nef."""
    form = form or TripleForm.fano222()
    return _cone_threshold(form.anticanonical, S, form.nef_cone)


def in_cone(D: ThreefoldClass, generators: Sequence[ThreefoldClass]) -> bool:
    return all(c >= 0 for c in _cone_coordinates(D, generators))


@dataclass(frozen=True)
class NegativeTerm:
    """coefficient(u) * divisor, one summand of N(u)."""

    label: str
    divisor: ThreefoldClass
    coefficient: Poly1


@dataclass(frozen=True)
class NakayamaPiece:
    lo: Fraction
    hi: Fraction
    positive: ThreefoldClass
    negative: Tuple[NegativeTerm, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", as_rational(self.lo))
        object.__setattr__(self, "hi", as_rational(self.hi))
        object.__setattr__(self, "positive", ThreefoldClass(_poly(self.positive.h), _poly(self.positive.e)))

    @property
    def negative_class(self) -> ThreefoldClass:
        total = ThreefoldClass(Poly1(), Poly1())
        for term in self.negative:
            total = total + term.divisor * term.coefficient
        return total

    def contains(self, u: Fraction) -> bool:
        return self.lo <= u <= self.hi


@dataclass(frozen=True)
class NakayamaTable:
    """Piecewise decomposition -K_X - uS = P(u) + N(u) supplied as input."""

    name: str
    divisor_label: str
    divisor: ThreefoldClass
    pieces: Tuple[NakayamaPiece, ...]
    form: TripleForm = field(default_factory=TripleForm.fano222)

    @property
    def pseff_limit(self) -> Fraction:
        return self.pieces[-1].hi

    @property
    def breakpoints(self) -> List[Fraction]:
        return [self.pieces[0].lo] + [p.hi for p in self.pieces]

    def piece_at(self, u: RationalLike) -> NakayamaPiece:
        u = as_rational(u)
        for piece in self.pieces:
            if piece.contains(u):
                return piece
        raise ValueError(f"u = {format_rational(u)} is outside table {self.name}")

    def positive_at(self, u: RationalLike) -> ThreefoldClass:
        return self.piece_at(u).positive.at(u)

    def negative_at(self, u: RationalLike) -> Dict[str, Fraction]:
        u = as_rational(u)
        return {t.label: t.coefficient(u) for t in self.piece_at(u).negative}

    def refine(self, at: RationalLike) -> "NakayamaTable":
        """Split the piece containing ``at`` into two pieces with the same data."""
        at = as_rational(at)
        pieces: List[NakayamaPiece] = []
        for piece in self.pieces:
            if piece.lo < at < piece.hi:
                pieces.append(NakayamaPiece(piece.lo, at, piece.positive, piece.negative))
                pieces.append(NakayamaPiece(at, piece.hi, piece.positive, piece.negative))
            else:
                pieces.append(piece)
        return NakayamaTable(self.name, self.divisor_label, self.divisor, tuple(pieces), self.form)


@dataclass(frozen=True)
class RestrictionMap:
    """Restriction from X to the surface ``surface`` with class ``divisor``."""

    name: str
    surface: SurfaceLattice
    divisor_label: str
    divisor: ThreefoldClass
    image_h: DivisorClass
    image_e: DivisorClass


def restrict(m: RestrictionMap, D: ThreefoldClass) -> DivisorClass:
    """D|_S for a class with rational coefficients."""
    if D.is_family:
        raise TypeError("restrict a family member: call D.at(u) first")
    return m.image_h * D.h + m.image_e * D.e


def check_compatibility(form: TripleForm, m: RestrictionMap) -> List[str]:
    """(A|_S).(B|_S) against A.B.S for A, B in {H, E}; returns violations."""
    violations = []
    for (a_name, A), (b_name, B) in itertools.combinations_with_replacement((("H", H), ("E", E)), 2):
        on_surface = intersect(m.surface, restrict(m, A), restrict(m, B))
        on_threefold = triple(form, A, B, m.divisor)
        if on_surface != on_threefold:
            violations.append(
                f"{m.name}: {a_name}|.{b_name}| = {format_rational(on_surface)} "
                f"but {a_name}.{b_name}.{m.divisor_label} = {format_rational(on_threefold)}"
            )
    return violations


def hirzebruch_twist(form: TripleForm, n: int) -> Fraction:
    """k with -E|_E = s + k l, from (s + k l)^2 = -n + 2k = E^3."""
    return (form.tensor[3] + n) / 2


def exceptional_restriction(form: TripleForm, n: int) -> RestrictionMap:
    """Restriction to E = F_n: H|_E = (-HE^2) l and E|_E = -(s + k l)."""
    k = hirzebruch_twist(form, n)
    if k.denominator != 1:
        raise ValueError(f"E^3 + n must be even, got n = {n}")
    surface = make_surface(SurfaceKind.HIRZEBRUCH, n)
    return RestrictionMap(
        name=f"E->F{n}",
        surface=surface,
        divisor_label="E",
        divisor=E,
        image_h=surface.divisor(0, -form.tensor[2]),
        image_e=surface.divisor(-1, -k),
    )


def admissible_hirzebruch_indices(form: TripleForm, limit: int = 30) -> List[int]:
    """n in [0, limit] with k integral and Q~|_E . s >= 0."""
    admissible = []
    for n in range(limit + 1):
        if (form.tensor[3] + n) % 2 != 0:
            continue
        m = exceptional_restriction(form, n)
        dot = intersect(m.surface, restrict(m, QTILDE), m.surface.curve("s"))
        if dot >= 0:
            admissible.append(n)
    logger.debug(f"admissible Hirzebruch indices up to {limit}: {admissible}")
    return admissible


@dataclass
class TableDiagnostics:
    table: str
    passed: List[str] = field(default_factory=list)
    violations: List[str] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def check(self, condition: bool, label: str, detail: str = "") -> None:
        if condition:
            self.passed.append(label)
        else:
            self.violations.append(f"{label}: {detail}" if detail else label)


def _sample_points(lo: Fraction, hi: Fraction) -> List[Fraction]:
    return [lo, (3 * lo + hi) / 4, (lo + hi) / 2, (lo + 3 * hi) / 4, hi]


def validate_table(t: NakayamaTable, maps: Sequence[RestrictionMap] = ()) -> TableDiagnostics:
    """Every checkable consequence of the table, collected without raising."""
    form = t.form
    diagnostics = TableDiagnostics(t.name)
    if not t.pieces:
        diagnostics.check(False, "table has pieces")
        return diagnostics

    diagnostics.check(t.pieces[0].lo == 0, "starts at u = 0", f"starts at {format_rational(t.pieces[0].lo)}")
    for left, right in zip(t.pieces, t.pieces[1:]):
        diagnostics.check(
            left.hi == right.lo, f"contiguous at {format_rational(left.hi)}",
            f"gap to {format_rational(right.lo)}",
        )

    family = form.anticanonical - t.divisor * U
    for piece in t.pieces:
        span = f"[{format_rational(piece.lo)}, {format_rational(piece.hi)}]"
        diagnostics.check(
            piece.positive + piece.negative_class == family,
            f"P + N = -K - u{t.divisor_label} on {span}",
            f"P + N = {piece.positive + piece.negative_class}",
        )
        for term in piece.negative:
            if term.coefficient.degree > 1:
                diagnostics.check(False, f"N coefficient of {term.label} affine on {span}")
                continue
            low, high = term.coefficient(piece.lo), term.coefficient(piece.hi)
            diagnostics.check(
                low >= 0 and high >= 0, f"N coefficient of {term.label} >= 0 on {span}",
                f"values {format_rational(low)}, {format_rational(high)}",
            )
        for u in _sample_points(piece.lo, piece.hi):
            P = piece.positive.at(u)
            if not in_cone(P, form.nef_cone):
                diagnostics.check(False, f"P({format_rational(u)}) in the declared nef cone", str(P))
            for m in maps:
                if not is_nef(m.surface, restrict(m, P)):
                    diagnostics.check(False, f"P({format_rational(u)})|_{m.name} nef", str(restrict(m, P)))

    for left, right in zip(t.pieces, t.pieces[1:]):
        b = left.hi
        where = format_rational(b)
        diagnostics.check(left.positive.at(b) == right.positive.at(b), f"P continuous at {where}")
        diagnostics.check(
            left.negative_class.at(b) == right.negative_class.at(b), f"N continuous at {where}"
        )
        diagnostics.check(
            cube(form, left.positive)(b) == cube(form, right.positive)(b),
            f"volume continuous at {where}",
        )

    try:
        limit = pseff_threshold(t.divisor, form)
        diagnostics.check(
            t.pseff_limit == limit, "ends at the pseudo-effective threshold",
            f"{format_rational(t.pseff_limit)} vs {format_rational(limit)}",
        )
    except (Unbounded, ValueError) as exc:
        diagnostics.check(False, "pseudo-effective threshold defined", str(exc))
    diagnostics.check(
        cube(form, t.pieces[-1].positive)(t.pseff_limit) == 0, "volume vanishes at the last breakpoint"
    )

    prefix_end = Fraction(0)
    for piece in t.pieces:
        if all(term.coefficient.is_zero() for term in piece.negative):
            prefix_end = piece.hi
        else:
            break
    try:
        nef_limit = nef_threshold(t.divisor, form)
        diagnostics.check(
            prefix_end == nef_limit, "N = 0 exactly up to the nef threshold",
            f"{format_rational(prefix_end)} vs {format_rational(nef_limit)}",
        )
    except (Unbounded, ValueError) as exc:
        diagnostics.check(False, "nef threshold defined", str(exc))

    for m in maps:
        for violation in check_compatibility(form, m):
            diagnostics.check(False, f"restriction {m.name} compatible", violation)

    diagnostics.notes.append(
        "nefness of P(u) on X is checked through restrictions and the declared nef cone only"
    )
    logger.debug(f"table {t.name}: {len(diagnostics.passed)} checks passed, {len(diagnostics.violations)} violations")
    return diagnostics


def volume_function(t: NakayamaTable) -> PiecewisePoly:
    """u -> P(u)^3 as a continuous piecewise polynomial."""
    return PiecewisePoly.from_pieces((p.lo, p.hi, cube(t.form, p.positive)) for p in t.pieces)


def s_divisor(t: NakayamaTable) -> Fraction:
    """(1/(-K_X)^3) * integral of vol(-K_X - uS) over [0, pseff limit]."""
    diagnostics = validate_table(t)
    if not diagnostics.ok:
        raise TableInvalid(f"table {t.name}: " + "; ".join(diagnostics.violations))
    return piecewise_integrate(volume_function(t)) / t.form.anticanonical_degree
