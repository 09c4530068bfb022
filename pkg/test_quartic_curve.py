"""Tests for cubic pencils, branch divisors and the factorization certificate."""

from fractions import Fraction

import pytest

from engine.exact_core import Poly1, X
from engine.quartic_curve import (
    BinaryForm,
    CurveClassification,
    branch_certificate,
    branch_divisor,
    certificate_at_square,
    classify_lambda,
    classify_pencil,
    cubic_discriminant,
    distinct_root_count,
    exceptional_lambdas,
    pencil_forms,
    resultant_cubics,
    square_free_decomposition,
    star_forms,
    star_resultant,
)


class TestBinaryCubics:

    def test_forms(self):
        f, g = star_forms(2)
        assert f.evaluate(1, 1) == 3
        assert g.evaluate(Fraction(1), Fraction(0)) == 0
        assert str(f) == "x^3 + 2x^2y"
        with pytest.raises(ValueError):
            BinaryForm(3, (1, 2))

    def test_discriminant(self):
        # x(x - y)(x + y) has three distinct roots
        assert cubic_discriminant(BinaryForm(3, (0, -1, 0, 1))) == 4
        f, _ = star_forms(5)
        assert cubic_discriminant(f) == 0

    def test_resultant(self):
        assert star_resultant() == Poly1((1, 0, -1))
        assert resultant_cubics(*star_forms(2)) == -3
        assert resultant_cubics(*star_forms(1)) == 0
        # x^3 and y^3 + x y^2 share no root
        assert resultant_cubics(*pencil_forms(0, 1)) == 1

    def test_symbolic_forms_specialise(self):
        f, g = pencil_forms(X, X)
        assert f.at(2) == star_forms(2)[0]
        assert g.at(Fraction(5, 7)) == star_forms(Fraction(5, 7))[1]


class TestSquareFree:

    def test_decomposition(self):
        p = Poly1((-4, 8, -5, 1))  # (x - 1)(x - 2)^2
        assert square_free_decomposition(p) == [(Poly1((-1, 1)), 1), (Poly1((-2, 1)), 2)]
        assert distinct_root_count(p) == 2

    def test_constants(self):
        assert square_free_decomposition(Poly1((3,))) == []
        assert distinct_root_count(Poly1((3,))) == 0


class TestBranchDivisor:

    def test_generic_value(self):
        branch = branch_divisor(2)
        assert branch.distinct_count == 4
        assert branch.unit == 32
        assert branch.form == BinaryForm(4, (0, 32, 61, 32, 0))

    def test_zero(self):
        branch = branch_divisor(0)
        assert branch.distinct_count == 2
        assert branch.unit == -27
        assert {(f.coeffs, m) for f, m in branch.factors} == {((0, 1), 2), ((1, 0), 2)}

    def test_square_factor_at_three(self):
        branch = branch_divisor(3)
        assert branch.distinct_count == 3
        assert (BinaryForm(1, (1, 1)), 2) in branch.factors


class TestClassification:

    @pytest.mark.parametrize("lam, expected, count", [
        (2, CurveClassification.SMOOTH_FOUR_BRANCH, 4),
        (Fraction(5, 7), CurveClassification.SMOOTH_FOUR_BRANCH, 4),
        (0, CurveClassification.DEGENERATE_BRANCH, 2),
        (3, CurveClassification.DEGENERATE_BRANCH, 3),
        (-3, CurveClassification.DEGENERATE_BRANCH, 3),
        (1, CurveClassification.SINGULAR_CURVE, None),
        (-1, CurveClassification.SINGULAR_CURVE, None),
    ])
    def test_star_family(self, lam, expected, count):
        result = classify_lambda(lam)
        assert result.classification == expected
        if count is not None:
            assert result.distinct_count == count

    def test_non_polystable_example(self):
        classification, resultant, count = classify_pencil(*pencil_forms(0, 1))
        assert classification == CurveClassification.DEGENERATE_BRANCH
        assert resultant == 1
        assert count == 3

    def test_totally_degenerate_pencil(self):
        f = BinaryForm(3, (0, 0, 1, 0))  # x^2 y
        g = BinaryForm(3, (0, 0, 0, 1))  # x^3
        classification, resultant, count = classify_pencil(f, g)
        assert classification == CurveClassification.TOTALLY_DEGENERATE
        assert resultant == 0
        assert count == 0

    def test_string_values(self):
        assert CurveClassification.SINGULAR_CURVE.value == "SingularCurve"


class TestCertificate:

    def test_expansion(self):
        certificate = branch_certificate()
        assert certificate.polynomial == Poly1((729, 0, -972, 0, 270, 0, -28, 0, 1))
        assert certificate.in_square() == Poly1((729, -972, 270, -28, 1))
        lam = Fraction(5, 7)
        assert certificate.polynomial(lam) == (lam ** 2 - 1) * (lam ** 2 - 9) ** 3

    def test_quadratic_factor(self):
        A, B, C = branch_certificate().quadratic
        assert A == C == Poly1((0, 0, 0, 4))
        assert B == Poly1((-27, 0, 18, 0, 1))

    def test_value_at_square(self):
        assert certificate_at_square(3) == -432
        assert certificate_at_square(9) == 0
        assert certificate_at_square(1) == 0

    def test_exceptional_search(self):
        assert exceptional_lambdas(10) == [-3, -1, 0, 1, 3]
