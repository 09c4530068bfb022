"""Neron-Severi lattices of the quadric, Hirzebruch and quintic del Pezzo surfaces.

Zariski decomposition follows the support-growth loop: start from D, add
every listed curve that pairs negatively with the current positive part,
re-solve the Gram system on the enlarged support, repeat until nothing pairs
negatively. Failure of any step proves D is not pseudo-effective.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from loguru import logger

from engine.errors import LatticeMismatch, NotPseudoEffective, VerificationFailed
from engine.exact_core import (
    Affine2,
    Poly1,
    RationalLike,
    affine_root,
    as_rational,
    format_rational,
    germ_sign,
    is_negative_definite,
    solve_linear,
)


class SurfaceKind(str, Enum):
    """Built-in surface families."""
    QUADRIC = "quadric"
    HIRZEBRUCH = "hirzebruch"
    DELPEZZO5 = "delpezzo5"
    CUSTOM = "custom"


@dataclass(frozen=True)
class DivisorClass:
    """Coefficient vector over the basis of a named lattice."""

    lattice: str
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(as_rational(c) for c in self.coeffs))

    def _check(self, other: "DivisorClass") -> None:
        if not isinstance(other, DivisorClass):
            raise TypeError(f"expected DivisorClass, got {type(other).__name__}")
        if other.lattice != self.lattice or len(other.coeffs) != len(self.coeffs):
            raise LatticeMismatch(f"{self.lattice} vs {other.lattice}")

    def __add__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(self.lattice, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "DivisorClass") -> "DivisorClass":
        self._check(other)
        return DivisorClass(self.lattice, tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "DivisorClass":
        return DivisorClass(self.lattice, tuple(-a for a in self.coeffs))

    def __mul__(self, factor: RationalLike) -> "DivisorClass":
        f = as_rational(factor)
        return DivisorClass(self.lattice, tuple(a * f for a in self.coeffs))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def __str__(self) -> str:
        return "(" + ", ".join(format_rational(c) for c in self.coeffs) + ")"


@dataclass(frozen=True)
class NegativeCurve:
    label: str
    divisor: DivisorClass


@dataclass(frozen=True)
class SurfaceLattice:
    """Basis, intersection form and the finite list of cone generators."""

    name: str
    basis: Tuple[str, ...]
    gram: Tuple[Tuple[Fraction, ...], ...]
    negative_curves: Tuple[NegativeCurve, ...]
    effective_generators: Tuple[DivisorClass, ...]

    def __post_init__(self) -> None:
        rank = len(self.basis)
        gram = tuple(tuple(as_rational(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", gram)
        if len(gram) != rank or any(len(row) != rank for row in gram):
            raise ValueError(f"gram of {self.name} must be {rank}x{rank}")
        for i in range(rank):
            for j in range(i + 1, rank):
                if gram[i][j] != gram[j][i]:
                    raise ValueError(f"gram of {self.name} is not symmetric at ({i}, {j})")
        for curve in self.negative_curves:
            self._owns(curve.divisor)
            if self.pair(curve.divisor.coeffs, curve.divisor.coeffs) > 0:
                raise ValueError(f"curve {curve.label} on {self.name} has positive self-intersection")
        for generator in self.effective_generators:
            self._owns(generator)

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def labels(self) -> List[str]:
        return [c.label for c in self.negative_curves]

    def _owns(self, divisor: DivisorClass) -> None:
        if divisor.lattice != self.name or len(divisor.coeffs) != self.rank:
            raise LatticeMismatch(f"class on {divisor.lattice} used on {self.name}")

    def pair(self, x: Sequence[Any], y: Sequence[Any]) -> Any:
        """Bilinear form on raw coefficient vectors (Fractions or Poly1)."""
        total: Any = Fraction(0)
        for i, xi in enumerate(x):
            for j, yj in enumerate(y):
                g = self.gram[i][j]
                if g != 0:
                    total = total + xi * (g * yj)
        return total

    def divisor(self, *coeffs: RationalLike) -> DivisorClass:
        if len(coeffs) != self.rank:
            raise LatticeMismatch(f"{self.name} has rank {self.rank}, got {len(coeffs)} coefficients")
        return DivisorClass(self.name, tuple(as_rational(c) for c in coeffs))

    def from_mapping(self, terms: Mapping[str, RationalLike]) -> DivisorClass:
        """Build a class from ``{basis_label: coefficient}``."""
        unknown = set(terms) - set(self.basis)
        if unknown:
            raise LatticeMismatch(f"{self.name} has no basis elements {sorted(unknown)}")
        return DivisorClass(self.name, tuple(as_rational(terms.get(b, 0)) for b in self.basis))

    def zero(self) -> DivisorClass:
        return DivisorClass(self.name, (Fraction(0),) * self.rank)

    def curve_index(self, label: str) -> int:
        for index, curve in enumerate(self.negative_curves):
            if curve.label == label:
                return index
        raise KeyError(f"{self.name} has no curve {label!r}")

    def curve(self, label: str) -> DivisorClass:
        return self.negative_curves[self.curve_index(label)].divisor


def _unit(name: str, rank: int, index: int, value: int = 1) -> DivisorClass:
    coeffs = [Fraction(0)] * rank
    coeffs[index] = Fraction(value)
    return DivisorClass(name, tuple(coeffs))


def make_surface(kind: SurfaceKind, n: Optional[int] = None, name: Optional[str] = None) -> SurfaceLattice:
    """Built-in lattices: P1 x P1, the Hirzebruch surface F_n, the quintic del Pezzo."""
    kind = SurfaceKind(kind)
    if kind == SurfaceKind.QUADRIC:
        name = name or "quadric"
        rulings = (NegativeCurve("r1", _unit(name, 2, 0)), NegativeCurve("r2", _unit(name, 2, 1)))
        return SurfaceLattice(
            name=name,
            basis=("h1", "h2"),
            gram=((0, 1), (1, 0)),
            negative_curves=rulings,
            effective_generators=tuple(c.divisor for c in rulings),
        )

    if kind == SurfaceKind.HIRZEBRUCH:
        if n is None or n < 0:
            raise ValueError("hirzebruch surfaces need an index n >= 0")
        name = name or f"F{n}"
        curves = (NegativeCurve("s", _unit(name, 2, 0)), NegativeCurve("l", _unit(name, 2, 1)))
        return SurfaceLattice(
            name=name,
            basis=("s", "l"),
            gram=((-n, 1), (1, 0)),
            negative_curves=curves,
            effective_generators=tuple(c.divisor for c in curves),
        )

    if kind == SurfaceKind.DELPEZZO5:
        name = name or "dP5"
        basis = ("l", "e1", "e2", "e3", "e4")
        gram = tuple(
            tuple(Fraction(1 if i == j == 0 else (-1 if i == j else 0)) for j in range(5))
            for i in range(5)
        )
        curves = [NegativeCurve(f"e{i}", _unit(name, 5, i)) for i in range(1, 5)]
        for i, j in itertools.combinations(range(1, 5), 2):
            coeffs = [Fraction(0)] * 5
            coeffs[0], coeffs[i], coeffs[j] = Fraction(1), Fraction(-1), Fraction(-1)
            curves.append(NegativeCurve(f"l{i}{j}", DivisorClass(name, tuple(coeffs))))
        return SurfaceLattice(
            name=name,
            basis=basis,
            gram=gram,
            negative_curves=tuple(curves),
            effective_generators=tuple(c.divisor for c in curves),
        )

    raise ValueError("custom lattices are built with make_custom_surface")


def make_custom_surface(
    name: str,
    basis: Sequence[str],
    gram: Sequence[Sequence[RationalLike]],
    negative_curves: Mapping[str, Sequence[RationalLike]],
    effective_generators: Optional[Sequence[Sequence[RationalLike]]] = None,
) -> SurfaceLattice:
    """A user-supplied lattice; effective generators default to the curve list."""
    curves = tuple(
        NegativeCurve(label, DivisorClass(name, tuple(as_rational(c) for c in coeffs)))
        for label, coeffs in negative_curves.items()
    )
    if effective_generators is None:
        generators = tuple(c.divisor for c in curves)
    else:
        generators = tuple(DivisorClass(name, tuple(as_rational(c) for c in g)) for g in effective_generators)
    return SurfaceLattice(
        name=name,
        basis=tuple(basis),
        gram=tuple(tuple(as_rational(x) for x in row) for row in gram),
        negative_curves=curves,
        effective_generators=generators,
    )


def intersect(L: SurfaceLattice, D1: DivisorClass, D2: DivisorClass) -> Fraction:
    """D1 . D2 on L."""
    L._owns(D1)
    L._owns(D2)
    return L.pair(D1.coeffs, D2.coeffs)


def is_nef(L: SurfaceLattice, D: DivisorClass) -> bool:
    L._owns(D)
    generators = [c.divisor for c in L.negative_curves] + list(L.effective_generators)
    return all(L.pair(D.coeffs, g.coeffs) >= 0 for g in generators)


@dataclass(frozen=True)
class ZariskiDecomposition:
    positive: DivisorClass
    negative: Tuple[Tuple[int, Fraction], ...]

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(index for index, _ in self.negative)

    def negative_class(self, L: SurfaceLattice) -> DivisorClass:
        total = L.zero()
        for index, coefficient in self.negative:
            total = total + L.negative_curves[index].divisor * coefficient
        return total


def _sign(value: Any) -> int:
    return (value > 0) - (value < 0)


def _grow_support(
    L: SurfaceLattice, target: Sequence[Any], sign: Callable[[Any], int]
) -> Tuple[List[int], List[Any], List[Any]]:
    """The support-growth loop over any ordered coefficient ring.

    Returns (support, coefficients on the support, positive part).
    """
    curves = [c.divisor.coeffs for c in L.negative_curves]
    support: List[int] = []
    coefficients: List[Any] = []
    positive: List[Any] = list(target)

    while True:
        if support:
            block = [[L.pair(curves[i], curves[j]) for j in support] for i in support]
            if not is_negative_definite(block):
                raise NotPseudoEffective(
                    f"support {[L.negative_curves[i].label for i in support]} on {L.name} is not negative definite"
                )
            rhs = [L.pair(target, curves[i]) for i in support]
            coefficients = solve_linear(block, rhs)
            for index, a in zip(support, coefficients):
                if sign(a) < 0:
                    raise NotPseudoEffective(
                        f"negative coefficient on {L.negative_curves[index].label} over {L.name}"
                    )
            positive = list(target)
            for index, a in zip(support, coefficients):
                positive = [p - a * c for p, c in zip(positive, curves[index])]

        entering = [
            i for i in range(len(curves))
            if i not in support and sign(L.pair(positive, curves[i])) < 0
        ]
        if not entering:
            break
        logger.debug(f"{L.name}: support grows by {[L.negative_curves[i].label for i in entering]}")
        support = sorted(support + entering)

    for generator in L.effective_generators:
        if sign(L.pair(positive, generator.coeffs)) < 0:
            raise NotPseudoEffective(f"positive part pairs negatively with a generator of {L.name}")
    return support, coefficients, positive


def zariski(L: SurfaceLattice, D: DivisorClass) -> ZariskiDecomposition:
    """Zariski decomposition D = P + N of a pseudo-effective class."""
    L._owns(D)
    support, coefficients, positive = _grow_support(L, D.coeffs, _sign)
    negative = tuple((i, a) for i, a in zip(support, coefficients) if a != 0)
    return ZariskiDecomposition(DivisorClass(L.name, tuple(positive)), negative)


def volume(L: SurfaceLattice, D: DivisorClass) -> Fraction:
    """P^2 of the positive part, 0 when D is not pseudo-effective."""
    try:
        decomposition = zariski(L, D)
    except NotPseudoEffective:
        return Fraction(0)
    return intersect(L, decomposition.positive, decomposition.positive)


def is_pseudo_effective(L: SurfaceLattice, D: DivisorClass) -> bool:
    try:
        zariski(L, D)
    except NotPseudoEffective:
        return False
    return True


@dataclass(frozen=True)
class ZariskiFamily:
    """Zariski decomposition of D - vZ on the chamber starting at v0.

    ``positive`` and the negative coefficients are affine in v; the support is
    valid on [lower, upper] (``upper`` None when unbounded).
    """

    lattice: str
    v0: Fraction
    support: Tuple[int, ...]
    positive: Tuple[Poly1, ...]
    negative: Tuple[Tuple[int, Poly1], ...]
    lower: Fraction
    upper: Optional[Fraction]

    def positive_at(self, v: RationalLike) -> DivisorClass:
        v = as_rational(v)
        return DivisorClass(self.lattice, tuple(p(v) for p in self.positive))

    def coefficient(self, index: int) -> Poly1:
        for i, a in self.negative:
            if i == index:
                return a
        return Poly1()


def zariski_germ(
    L: SurfaceLattice, D: DivisorClass, Z: DivisorClass, v0: RationalLike
) -> ZariskiFamily:
    """Zariski decomposition of D - vZ for v slightly larger than v0.

    Every comparison in the support-growth loop is made on the germ at v0+,
    so the support found is the one of the open chamber (v0, v0 + eps).
    """
    L._owns(D)
    L._owns(Z)
    v0 = as_rational(v0)
    target = [Poly1((d, -z)) for d, z in zip(D.coeffs, Z.coeffs)]

    def sign(value: Any) -> int:
        return germ_sign(value if isinstance(value, Poly1) else Poly1((value,)), v0)

    support, coefficients, positive = _grow_support(L, target, sign)
    positive = [p if isinstance(p, Poly1) else Poly1((p,)) for p in positive]
    coefficients = [a if isinstance(a, Poly1) else Poly1((a,)) for a in coefficients]

    constraints: List[Poly1] = list(coefficients)
    for index, curve in enumerate(L.negative_curves):
        if index not in support:
            constraints.append(Poly1._coerce(L.pair(positive, curve.divisor.coeffs)))
    for generator in L.effective_generators:
        constraints.append(Poly1._coerce(L.pair(positive, generator.coeffs)))

    lower, upper = Fraction(0), None
    for c in constraints:
        if c.degree > 1:
            raise VerificationFailed(f"non-affine chamber constraint {c}")
        if c.degree == 1:
            # u is fixed for the slice, so every event line is v = const
            root = affine_root(Affine2(c.coeffs[0], 0, c.coeffs[1]), 0)
            if c.coeffs[1] < 0:
                upper = root if upper is None else min(upper, root)
            else:
                lower = max(lower, root)
    if upper is not None and upper <= v0:
        raise VerificationFailed(f"empty chamber at v0={format_rational(v0)} on {L.name}")

    return ZariskiFamily(
        lattice=L.name,
        v0=v0,
        support=tuple(support),
        positive=tuple(positive),
        negative=tuple(zip(support, coefficients)),
        lower=lower,
        upper=upper,
    )


def _independent_rows(columns: Sequence[Sequence[Fraction]], rank: int) -> Optional[Tuple[int, ...]]:
    """Indices of rows giving an invertible square submatrix, if any."""
    k = len(columns)
    for rows in itertools.combinations(range(rank), k):
        block = [[columns[c][r] for c in range(k)] for r in rows]
        try:
            solve_linear(block, [Fraction(0)] * k)
        except VerificationFailed:
            continue
        return rows
    return None


def in_effective_cone(L: SurfaceLattice, D: DivisorClass) -> bool:
    """Exact membership in the cone spanned by ``effective_generators``.

    By Caratheodory, D is in the cone iff it is a nonnegative combination of
    some linearly independent subset of the generators.
    """
    L._owns(D)
    if D.is_zero():
        return True
    generators = [g.coeffs for g in L.effective_generators]
    for size in range(1, min(L.rank, len(generators)) + 1):
        for subset in itertools.combinations(range(len(generators)), size):
            columns = [generators[i] for i in subset]
            rows = _independent_rows(columns, L.rank)
            if rows is None:
                continue
            block = [[columns[c][r] for c in range(size)] for r in rows]
            weights = solve_linear(block, [D.coeffs[r] for r in rows])
            if any(w < 0 for w in weights):
                continue
            rebuilt = [sum((w * col[r] for w, col in zip(weights, columns)), Fraction(0)) for r in range(L.rank)]
            if rebuilt == list(D.coeffs):
                return True
    return False


def dominates(L: SurfaceLattice, Z: DivisorClass, C: DivisorClass) -> bool:
    """True when Z - C is effective (|Z - C| nonempty)."""
    return in_effective_cone(L, Z - C)


def relabel_points(L: SurfaceLattice, D: DivisorClass, permutation: Mapping[int, int]) -> DivisorClass:
    """Apply a permutation of e1..e4 (1-based) to a class on the quintic del Pezzo."""
    L._owns(D)
    coeffs = list(D.coeffs)
    moved = list(coeffs)
    for source, dest in permutation.items():
        moved[dest] = coeffs[source]
    return DivisorClass(L.name, tuple(moved))
