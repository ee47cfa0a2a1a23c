"""Lattice normalization constants and the exact 1/pi-polynomial ring."""

import math
from fractions import Fraction

import pytest

from fgfflab.constants import (
    C2_CLOSED,
    CT_CLOSED,
    HEIGHT_ONE_Z2_CLOSED,
    TRIANGULAR_HEIGHT_FACTOR,
    PiPoly,
    constant_for,
    height_constant_hypercubic,
    height_constant_triangular,
    height_one_infinite_z2,
    square_degeneration_constant,
    triangular_height_one_infinite,
)


def test_pipoly_ring_arithmetic():
    p = PiPoly((1, 2))  # 1 + 2/pi
    q = PiPoly((0, 0, 3))  # 3/pi^2
    assert p + q == PiPoly((1, 2, 3))
    assert p - p == PiPoly(())
    assert -p == PiPoly((-1, -2))
    assert p * q == PiPoly((0, 0, 3, 6))
    # scalars coerce into degree-zero polynomials on either side
    assert 2 * p == PiPoly((2, 4))
    assert p + Fraction(1, 2) == PiPoly((Fraction(3, 2), 2))
    assert 1 - p == PiPoly((0, -2))


def test_pipoly_trims_trailing_zeros_and_hashes():
    assert PiPoly((1, 0, 0)) == PiPoly((1,))
    assert hash(PiPoly((1, 0))) == hash(PiPoly((1,)))
    assert PiPoly(()) == 0
    assert repr(PiPoly(())) == "PiPoly(0)"


def test_pipoly_float_evaluation():
    p = PiPoly((0, 2, -4))
    assert abs(float(p) - (2 / math.pi - 4 / math.pi**2)) < 1e-15


def test_square_constant_exact_closed_form():
    res = height_constant_hypercubic(2)
    assert res.exact == C2_CLOSED
    assert res.exact == PiPoly((0, 2, -4))
    assert abs(res.value - (2 / math.pi - 4 / math.pi**2)) < 1e-12


def test_single_site_height_anchor_z2():
    got = height_one_infinite_z2()
    assert got == HEIGHT_ONE_Z2_CLOSED
    assert got == PiPoly((0, 0, 2, -4))
    # the anchor is the square constant scaled by one extra power of 1/pi
    assert got == C2_CLOSED * PiPoly((0, 1))


def test_triangular_constant_matches_closed_form():
    res = height_constant_triangular()
    assert res.closed_form == CT_CLOSED
    assert abs(res.value - CT_CLOSED) < 1e-9
    assert f"{res.value:.4f}" == "0.2241"


def test_square_degeneration_reproduces_z2_exactly():
    res = square_degeneration_constant(exact=True)
    assert res.exact == C2_CLOSED
    res_f = square_degeneration_constant(exact=False)
    assert abs(res_f.value - float(C2_CLOSED)) < 1e-10


def test_triangular_single_site_prediction():
    pred = triangular_height_one_infinite()
    assert pred == height_constant_triangular().value * TRIANGULAR_HEIGHT_FACTOR
    assert 0.05 < pred < 0.06


def test_higher_dimensional_constants():
    c3 = height_constant_hypercubic(3, exact=False)
    c4 = height_constant_hypercubic(4, exact=False)
    assert abs(c3.value - 0.13815578447385302) < 1e-9
    assert abs(c4.value - 0.09957816672837076) < 1e-9
    assert c3.value > c4.value > 0


def test_exact_path_limited_to_two_dimensions():
    with pytest.raises(ValueError):
        height_constant_hypercubic(3, exact=True)


def test_constant_for_dispatch():
    assert constant_for("z2").kind == "z2"
    assert constant_for("tri").kind == "tri"
    with pytest.raises(ValueError):
        constant_for("honeycomb")


def test_subset_ledger_structure():
    res = height_constant_hypercubic(2)
    assert len(res.subset_terms) == 8  # subsets of the star containing dir 0
    assert all(row["subset"][0] == 0 for row in res.subset_terms)
    total = sum(row["contribution"] for row in res.subset_terms)
    assert abs(total / 2 - res.value) < 1e-12  # prefactor 1/d with d = 2
    tri = height_constant_triangular()
    assert len(tri.subset_terms) == 32
