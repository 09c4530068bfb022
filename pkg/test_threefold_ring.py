"""Tests for the intersection ring, cone thresholds and Nakayama tables."""

from fractions import Fraction

import pytest

from engine.errors import TableInvalid, Unbounded
from engine.exact_core import Poly1
from engine.surface_lattice import intersect, is_nef
from engine.threefold_ring import (
    ANTICANONICAL,
    E,
    H,
    QTILDE,
    U,
    V5_PULLBACK,
    NakayamaPiece,
    NakayamaTable,
    NegativeTerm,
    ThreefoldClass,
    admissible_hirzebruch_indices,
    check_compatibility,
    cube,
    exceptional_restriction,
    hirzebruch_twist,
    nef_threshold,
    pseff_threshold,
    restrict,
    s_divisor,
    triple,
    validate_table,
    volume_function,
)


def qtilde_table(form, last_hi=Fraction(2)):
    """-K_X - uQ~: P = (4-2u)H + (u-1)E on [0,1], N = (u-1)E on [1,2]."""
    return NakayamaTable(
        name="qtilde",
        divisor_label="Qtilde",
        divisor=QTILDE,
        pieces=(
            NakayamaPiece(Fraction(0), Fraction(1), ThreefoldClass(Poly1((4, -2)), Poly1((-1, 1)))),
            NakayamaPiece(
                Fraction(1), last_hi, ThreefoldClass(Poly1((4, -2)), Fraction(0)),
                (NegativeTerm("E", E, Poly1((-1, 1))),),
            ),
        ),
        form=form,
    )


class TestIntersectionNumbers:

    def test_tensor(self, form):
        assert triple(form, H, H, H) == 1
        assert triple(form, H, H, E) == 0
        assert triple(form, H, E, E) == -4
        assert triple(form, E, E, E) == -14

    def test_degrees(self, form):
        assert cube(form, ANTICANONICAL) == 30
        assert form.anticanonical_degree == 30
        assert cube(form, V5_PULLBACK) == 5

    def test_family_cube_is_a_polynomial(self, form):
        family = ANTICANONICAL - QTILDE * U
        volume = cube(form, family)
        assert isinstance(volume, Poly1)
        assert volume(0) == 30
        assert volume(1) == cube(form, ThreefoldClass(2, 0))

    def test_class_arithmetic(self):
        assert H * 4 - E == ANTICANONICAL
        assert (ANTICANONICAL - QTILDE * U).at(1) == ThreefoldClass(2, 0)
        assert not ANTICANONICAL.is_family
        assert (QTILDE * U).is_family


class TestThresholds:

    @pytest.mark.parametrize("divisor, expected", [(QTILDE, 2), (E, 1), (H, 2)])
    def test_pseudo_effective(self, form, divisor, expected):
        assert pseff_threshold(divisor, form) == expected

    @pytest.mark.parametrize("divisor, expected", [(QTILDE, 1), (E, Fraction(1, 3)), (H, 1)])
    def test_nef(self, form, divisor, expected):
        assert nef_threshold(divisor, form) == expected

    def test_unbounded_direction(self, form):
        with pytest.raises(Unbounded):
            nef_threshold(ThreefoldClass(-1, 0), form)

    def test_non_effective_divisor(self, form):
        with pytest.raises(ValueError):
            pseff_threshold(ThreefoldClass(-1, 0), form)


class TestRestrictions:

    def test_hirzebruch_twist(self, form):
        assert hirzebruch_twist(form, 0) == -7
        assert hirzebruch_twist(form, 2) == -6

    def test_qtilde_on_exceptional_divisor(self, form):
        for n, expected in ((0, 1), (2, 0), (4, -1)):
            m = exceptional_restriction(form, n)
            restricted = restrict(m, QTILDE)
            assert restricted == m.surface.divisor(1, Fraction(n + 2, 2))
            assert intersect(m.surface, restricted, m.surface.curve("s")) == expected

    def test_admissible_indices(self, form):
        assert admissible_hirzebruch_indices(form) == [0, 2]

    def test_odd_index(self, form):
        with pytest.raises(ValueError):
            exceptional_restriction(form, 1)

    def test_compatibility(self, scenario):
        for m in scenario.restrictions.values():
            assert check_compatibility(scenario.form, m) == [], m.name

    def test_broken_restriction_is_reported(self, scenario):
        m = scenario.restrictions["Q->quadric"]
        broken = type(m)(m.name, m.surface, m.divisor_label, m.divisor, m.image_h, m.surface.divisor(1, 1))
        assert check_compatibility(scenario.form, broken)

    def test_family_must_be_specialised(self, scenario):
        with pytest.raises(TypeError):
            restrict(scenario.restrictions["H->dP5"], ANTICANONICAL - H * U)

    def test_restricted_positive_parts_are_nef(self, scenario):
        for table in scenario.tables.values():
            for piece in table.pieces:
                u = (piece.lo + piece.hi) / 2
                for m in scenario.restrictions.values():
                    assert is_nef(m.surface, restrict(m, table.positive_at(u))), (table.name, m.name, u)


class TestTables:

    def test_valid_table(self, form):
        diagnostics = validate_table(qtilde_table(form))
        assert diagnostics.ok, diagnostics.violations
        assert diagnostics.notes

    def test_shipped_tables_with_all_maps(self, scenario):
        maps = list(scenario.restrictions.values())
        for table in scenario.tables.values():
            diagnostics = validate_table(table, maps)
            assert diagnostics.ok, (table.name, diagnostics.violations)

    def test_wrong_end_point(self, form):
        diagnostics = validate_table(qtilde_table(form, last_hi=Fraction(3, 2)))
        assert not diagnostics.ok
        assert any("pseudo-effective threshold" in v for v in diagnostics.violations)

    def test_identity_violation(self, form):
        table = qtilde_table(form)
        bad_piece = NakayamaPiece(Fraction(0), Fraction(1), ThreefoldClass(Poly1((4, -2)), Poly1((-1,))))
        broken = NakayamaTable(table.name, table.divisor_label, table.divisor, (bad_piece,) + table.pieces[1:], form)
        diagnostics = validate_table(broken)
        assert any(v.startswith("P + N") for v in diagnostics.violations)

    def test_s_divisor_values(self, scenario):
        assert s_divisor(scenario.tables["H"]) == Fraction(17, 30)
        assert s_divisor(scenario.tables["qtilde"]) == Fraction(43, 60)
        assert s_divisor(scenario.tables["E"]) == Fraction(161, 540)

    def test_s_divisor_rejects_invalid_tables(self, form):
        with pytest.raises(TableInvalid):
            s_divisor(qtilde_table(form, last_hi=Fraction(3, 2)))

    def test_volume_function(self, form):
        f = volume_function(qtilde_table(form))
        assert f(0) == 30
        assert f(2) == 0
        assert f.breakpoints == [0, 1, 2]

    def test_refine_keeps_the_value(self, scenario):
        table = scenario.tables["H"]
        refined = table.refine(Fraction(1, 2))
        assert refined.breakpoints == [0, Fraction(1, 2), 1, 2]
        assert s_divisor(refined) == s_divisor(table)

    def test_lookups(self, scenario):
        table = scenario.tables["E"]
        assert table.pseff_limit == 1
        assert table.positive_at(0) == ThreefoldClass(4, -1)
        assert table.negative_at(Fraction(2, 3)) == {"Qtilde": 1}
        with pytest.raises(ValueError):
            table.piece_at(2)
