"""The sympy oracles reproduce the tabulated values on their own."""

from fractions import Fraction

import pytest
import sympy

from engine.oracles import ORACLES, run_oracle, threefold_cube, to_fraction

F = Fraction


@pytest.mark.parametrize("name, expected", [
    ("tensor-cube-anticanonical", F(30)),
    ("tensor-cube-v5", F(5)),
    ("antiderivative-sx-h", F(17, 30)),
    ("antiderivative-sx-qtilde", F(43, 60)),
    ("antiderivative-sx-e", F(161, 540)),
    ("direct-quadric-e-cap-q", F(161, 540)),
    ("direct-quadric-correction", F(1, 15)),
    ("direct-quadric-diagonal", F(17, 30)),
    ("direct-hirzebruch-n0", F(1783, 3240)),
    ("direct-hirzebruch-n2", F(157, 270)),
    ("direct-l12-lower", F(107, 120)),
    ("direct-l12-upper", F(13, 120)),
    ("direct-l12-total", F(1)),
    ("direct-point-integral", F(11, 12)),
    ("direct-point-incidence", F(1, 12)),
    ("direct-conic-h4", F(27, 40)),
    ("display-conic-h4", F(23, 40)),
    ("certificate-at-three", F(-432)),
])
def test_scalar_oracles(name, expected):
    assert run_oracle(name) == expected


def test_polynomial_oracles():
    assert run_oracle("sylvester-star-resultant") == [1, 0, -1]
    expansion = [729, 0, -972, 0, 270, 0, -28, 0, 1]
    assert run_oracle("expand-certificate") == expansion
    assert run_oracle("factor-certificate") == expansion
    assert run_oracle("cone-thresholds") == [2, 1, 2]


def test_every_oracle_is_tested():
    assert len(ORACLES) == 22


def test_unknown_oracle():
    with pytest.raises(KeyError):
        run_oracle("no-such-oracle")


def test_helpers():
    assert threefold_cube(1, 0) == 1
    assert to_fraction(threefold_cube(2, -1)) == -2
    with pytest.raises(ValueError):
        to_fraction(sympy.sqrt(2))
