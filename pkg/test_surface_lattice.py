"""Tests for surface lattices and the Zariski decomposition."""

import random
from fractions import Fraction

import pytest

from engine.errors import LatticeMismatch, NotPseudoEffective
from engine.exact_core import is_negative_definite
from engine.surface_lattice import (
    SurfaceKind,
    dominates,
    in_effective_cone,
    intersect,
    is_nef,
    is_pseudo_effective,
    make_custom_surface,
    make_surface,
    relabel_points,
    volume,
    zariski,
    zariski_germ,
)

SWAP_PAIRS = {1: 3, 3: 1, 2: 4, 4: 2}  # e1 <-> e3, e2 <-> e4


def random_effective(L, rng, terms=4):
    """A random nonnegative combination of the effective generators."""
    D = L.zero()
    for _ in range(terms):
        generator = rng.choice(L.effective_generators)
        D = D + generator * Fraction(rng.randint(0, 6), rng.randint(1, 3))
    return D


def assert_zariski_axioms(L, D):
    decomposition = zariski(L, D)
    P = decomposition.positive
    assert P + decomposition.negative_class(L) == D, f"P + N != D for {D}"
    assert is_nef(L, P), f"P = {P} is not nef"
    for index, coefficient in decomposition.negative:
        assert coefficient > 0
        assert intersect(L, P, L.negative_curves[index].divisor) == 0
    support = decomposition.support
    if support:
        gram = [[intersect(L, L.negative_curves[i].divisor, L.negative_curves[j].divisor) for j in support]
                for i in support]
        assert is_negative_definite(gram)


@pytest.fixture(scope="module")
def surfaces():
    return {
        "quadric": make_surface(SurfaceKind.QUADRIC),
        "F0": make_surface(SurfaceKind.HIRZEBRUCH, 0),
        "F2": make_surface(SurfaceKind.HIRZEBRUCH, 2),
        "F3": make_surface(SurfaceKind.HIRZEBRUCH, 3),
        "dP5": make_surface(SurfaceKind.DELPEZZO5),
    }


class TestLattices:

    def test_builtin_shapes(self, surfaces):
        assert surfaces["quadric"].basis == ("h1", "h2")
        assert surfaces["F2"].name == "F2"
        assert surfaces["F2"].gram == ((-2, 1), (1, 0))
        dP5 = surfaces["dP5"]
        assert dP5.rank == 5
        assert len(dP5.labels) == 10
        for curve in dP5.negative_curves:
            assert intersect(dP5, curve.divisor, curve.divisor) == -1

    def test_del_pezzo_lines_meet_as_expected(self, surfaces):
        dP5 = surfaces["dP5"]
        assert intersect(dP5, dP5.curve("l12"), dP5.curve("l34")) == 1
        assert intersect(dP5, dP5.curve("l12"), dP5.curve("l13")) == 0
        assert intersect(dP5, dP5.curve("l12"), dP5.curve("e1")) == 1

    def test_from_mapping(self, surfaces):
        dP5 = surfaces["dP5"]
        assert dP5.from_mapping({"l": 1, "e1": -1, "e2": -1}) == dP5.curve("l12")
        with pytest.raises(LatticeMismatch):
            dP5.from_mapping({"h1": 1})

    def test_mixing_lattices(self, surfaces):
        with pytest.raises(LatticeMismatch):
            intersect(surfaces["F0"], surfaces["F0"].curve("s"), surfaces["F2"].curve("s"))

    def test_unknown_curve(self, surfaces):
        with pytest.raises(KeyError):
            surfaces["dP5"].curve("l56")

    def test_custom_surface_validation(self):
        with pytest.raises(ValueError, match="not symmetric"):
            make_custom_surface("bad", ["a", "b"], [[0, 1], [2, 0]], {"a": [1, 0]})
        with pytest.raises(ValueError, match="positive self-intersection"):
            make_custom_surface("bad", ["a"], [[1]], {"a": [1]})
        L = make_custom_surface("F1", ["s", "l"], [[-1, 1], [1, 0]], {"s": [1, 0], "l": [0, 1]})
        assert volume(L, L.divisor(1, 2)) == 3


class TestZariski:

    def test_nef_class(self, surfaces):
        F2 = surfaces["F2"]
        D = F2.divisor(1, 2)
        decomposition = zariski(F2, D)
        assert decomposition.negative == ()
        assert volume(F2, D) == 2

    def test_negative_curve_is_fixed_part(self, surfaces):
        F2 = surfaces["F2"]
        decomposition = zariski(F2, F2.divisor(1, 1))
        # s.(s + l) = -1 so s is subtracted with coefficient 1/2
        assert decomposition.negative == ((0, Fraction(1, 2)),)
        assert decomposition.positive == F2.divisor(Fraction(1, 2), 1)
        assert volume(F2, F2.divisor(1, 1)) == Fraction(1, 2)

    def test_del_pezzo(self, surfaces):
        dP5 = surfaces["dP5"]
        conic = dP5.from_mapping({"l": 2, "e1": -1, "e2": -1, "e3": -1, "e4": -1})
        assert is_nef(dP5, conic)
        assert volume(dP5, conic) == 0
        e1 = dP5.curve("e1")
        assert zariski(dP5, e1).positive.is_zero()
        assert volume(dP5, dP5.from_mapping({"l": 1})) == 1

    def test_not_pseudo_effective(self, surfaces):
        dP5 = surfaces["dP5"]
        minus_l = dP5.from_mapping({"l": -1})
        with pytest.raises(NotPseudoEffective):
            zariski(dP5, minus_l)
        assert volume(dP5, minus_l) == 0
        assert not is_pseudo_effective(dP5, minus_l)

    @pytest.mark.parametrize("name", ["quadric", "F0", "F2", "F3", "dP5"])
    def test_axioms_on_random_classes(self, surfaces, name):
        L = surfaces[name]
        rng = random.Random(2022 + len(name))
        for _ in range(1000):
            assert_zariski_axioms(L, random_effective(L, rng))

    @pytest.mark.parametrize("name, samples", [("F2", 100), ("dP5", 25)])
    def test_pseudo_effective_agrees_with_cone(self, surfaces, name, samples):
        L = surfaces[name]
        rng = random.Random(5)
        for _ in range(samples):
            D = L.divisor(*(Fraction(rng.randint(-4, 4), rng.randint(1, 2)) for _ in range(L.rank)))
            assert is_pseudo_effective(L, D) == in_effective_cone(L, D), f"{D}"

    def test_quadric_volume_grid(self, surfaces):
        Q = surfaces["quadric"]
        for a in range(-3, 6):
            for b in range(-3, 6):
                expected = 2 * a * b if a >= 0 and b >= 0 else 0
                assert volume(Q, Q.divisor(a, b)) == expected, (a, b)

    @pytest.mark.parametrize("name", ["quadric", "F2", "F3", "dP5"])
    def test_volume_is_homogeneous_of_degree_two(self, surfaces, name):
        L = surfaces[name]
        rng = random.Random(31)
        for _ in range(100):
            D = random_effective(L, rng)
            t = Fraction(rng.randint(0, 9), rng.randint(1, 4))
            assert volume(L, D * t) == t * t * volume(L, D), (D, t)

    @pytest.mark.parametrize("name", ["quadric", "F2", "F3", "dP5"])
    def test_removing_an_effective_curve_never_adds_volume(self, surfaces, name):
        L = surfaces[name]
        rng = random.Random(37)
        for _ in range(100):
            D = random_effective(L, rng)
            C = rng.choice(L.effective_generators)
            t = Fraction(rng.randint(0, 8), rng.randint(1, 3))
            assert volume(L, D) >= volume(L, D - C * t), (D, C, t)


class TestGerm:

    def test_hirzebruch_section(self, surfaces):
        F2 = surfaces["F2"]
        D, s = F2.divisor(1, 3), F2.curve("s")
        family = zariski_germ(F2, D, s, 0)
        assert family.support == ()
        assert family.upper == 1
        with pytest.raises(NotPseudoEffective):
            zariski_germ(F2, D, s, 1)

    def test_first_l12_chamber(self, surfaces):
        dP5 = surfaces["dP5"]
        D = dP5.from_mapping({"l": Fraction(7, 2), "e1": -1, "e2": -1, "e3": -1, "e4": -1})
        family = zariski_germ(dP5, D, dP5.curve("l12"), 0)
        assert family.support == ()
        assert family.upper == 1
        v = Fraction(1, 2)
        assert family.positive_at(v) == D - dP5.curve("l12") * v

    def test_support_changes_at_the_boundary(self, surfaces):
        dP5 = surfaces["dP5"]
        D = dP5.from_mapping({"l": Fraction(7, 2), "e1": -1, "e2": -1, "e3": -1, "e4": -1})
        family = zariski_germ(dP5, D, dP5.curve("l12"), 1)
        labels = {dP5.negative_curves[i].label for i, a in family.negative if not a.is_zero()}
        assert labels == {"e1", "e2"}
        assert family.upper == Fraction(3, 2)


class TestConeHelpers:

    def test_effective_cone(self, surfaces):
        dP5 = surfaces["dP5"]
        assert in_effective_cone(dP5, dP5.from_mapping({"l": 1}))
        assert in_effective_cone(dP5, dP5.from_mapping({"l": 2, "e1": -1, "e2": -1, "e3": -1, "e4": -1}))
        assert not in_effective_cone(dP5, dP5.from_mapping({"e1": -1}))

    def test_dominates(self, surfaces):
        dP5 = surfaces["dP5"]
        conic = dP5.from_mapping({"l": 2, "e1": -1, "e2": -1, "e3": -1, "e4": -1})
        assert dominates(dP5, conic, dP5.curve("l12"))
        assert not dominates(dP5, dP5.curve("l12"), conic)

    def test_relabel_equivariance(self, surfaces):
        dP5 = surfaces["dP5"]
        assert relabel_points(dP5, dP5.curve("l12"), SWAP_PAIRS) == dP5.curve("l34")
        rng = random.Random(17)
        for _ in range(200):
            D = random_effective(dP5, rng)
            swapped = relabel_points(dP5, D, SWAP_PAIRS)
            assert volume(dP5, swapped) == volume(dP5, D)
            assert zariski(dP5, swapped).positive == relabel_points(dP5, zariski(dP5, D).positive, SWAP_PAIRS)
