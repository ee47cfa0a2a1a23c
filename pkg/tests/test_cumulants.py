"""Closed cumulant formulas against the partition route they collapse."""

import time
from fractions import Fraction

import pytest

from fgfflab.cumulants import (
    CumulantReport,
    cumulant,
    cumulant_from_moments,
    height_one_cumulant_closed,
)
from fgfflab.greenfn import dirichlet_green
from fgfflab.lattice import build_box, build_triangular_patch
from fgfflab.moments import degree_moment, height_one_prob


def test_cumulant_from_moments_covariance():
    m = {(0,): Fraction(1, 2), (1,): Fraction(1, 3), (0, 1): Fraction(1, 4)}
    got = cumulant_from_moments(lambda b: m[tuple(sorted(b))], [0, 1])
    assert got == Fraction(1, 4) - Fraction(1, 6)


def test_closed_equals_partition_exact():
    lat = build_box(2, (2, 3))
    G = dirichlet_green(lat, exact=True)
    pts = [lat.vertex_id((0, 0)), lat.vertex_id((1, 2))]
    for field in ("degree", "neg_degree", "height1"):
        a = cumulant(lat, pts, field, "closed", green=G, exact=True)
        b = cumulant(lat, pts, field, "partition", green=G, exact=True)
        assert a.value == b.value, field


def test_closed_equals_partition_float():
    lat = build_box(2, (5, 5))
    G = dirichlet_green(lat)
    pts = [lat.vertex_id((1, 1)), lat.vertex_id((3, 3))]
    for field in ("degree", "neg_degree", "height1"):
        a = float(cumulant(lat, pts, field, "closed", green=G))
        b = float(cumulant(lat, pts, field, "partition", green=G))
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b)), field


def test_closed_equals_partition_three_points():
    lat = build_box(2, (7, 7))
    G = dirichlet_green(lat)
    pts = [lat.vertex_id((1, 1)), lat.vertex_id((3, 4)), lat.vertex_id((5, 2))]
    a = float(cumulant(lat, pts, "degree", "closed", green=G))
    b = float(cumulant(lat, pts, "degree", "partition", green=G))
    # the value is small through cancellation; absolute agreement is the
    # meaningful scale for entries of order one
    assert abs(a - b) <= 1e-15


def test_single_vertex_cumulant_is_moment():
    lat = build_box(2, (3, 3))
    G = dirichlet_green(lat, exact=True)
    v = lat.vertex_id((1, 1))
    assert cumulant(lat, [v], "degree", "closed", green=G, exact=True).value == \
        degree_moment(lat, [v], green=G, exact=True)
    assert cumulant(lat, [v], "neg_degree", "closed", green=G, exact=True).value == \
        -degree_moment(lat, [v], green=G, exact=True)
    assert cumulant(lat, [v], "height1", "closed", green=G, exact=True).value == \
        height_one_prob(lat, [v], green=G, exact=True)


def test_negated_field_flips_sign_by_order():
    lat = build_box(2, (7, 7))
    G = dirichlet_green(lat)
    pts2 = [lat.vertex_id((2, 2)), lat.vertex_id((4, 4))]
    pts3 = [lat.vertex_id((1, 1)), lat.vertex_id((3, 4)), lat.vertex_id((5, 2))]
    for pts, parity in ((pts2, 1), (pts3, -1)):
        a = float(cumulant(lat, pts, "degree", "closed", green=G))
        b = float(cumulant(lat, pts, "neg_degree", "closed", green=G))
        assert abs(b - parity * a) < 1e-15 + 1e-12 * abs(a)


def test_connected_sum_evaluators_agree():
    # enumeration is the reference, partition inversion the fast path
    lat = build_box(2, (5, 5))
    G = dirichlet_green(lat)
    pts = [lat.vertex_id((1, 1)), lat.vertex_id((3, 2))]
    a = height_one_cumulant_closed(lat, pts, green=G, method="enumerate")
    b = height_one_cumulant_closed(lat, pts, green=G, method="mobius")
    assert abs(float(a) - float(b)) < 1e-13
    assert "enumerate" in a.method and "mobius" in b.method


def test_triangular_closed_equals_partition():
    lat = build_triangular_patch(3)
    G = dirichlet_green(lat)
    pts = [lat.vertex_id((-1, 0)), lat.vertex_id((1, 0))]
    a = float(cumulant(lat, pts, "degree", "closed", green=G))
    b = float(cumulant(lat, pts, "degree", "partition", green=G))
    assert abs(a - b) <= 1e-12 * abs(b)


def test_report_metadata():
    lat = build_box(2, (4, 4))
    G = dirichlet_green(lat)
    pts = [lat.vertex_id((1, 1)), lat.vertex_id((2, 3))]
    rep = cumulant(lat, pts, "degree", "closed", green=G)
    assert isinstance(rep, CumulantReport)
    assert rep.field == "degree"
    assert rep.term_count > 0
    assert rep.max_term >= abs(float(rep))
    assert float(rep) == float(rep.value)


def test_field_validation():
    lat = build_box(2, (3, 3))
    with pytest.raises(ValueError):
        cumulant(lat, [0], "nonsense")
    with pytest.raises(ValueError):
        cumulant(lat, [0], "degree", "secret")


def test_good_set_guard_applies():
    lat = build_box(2, (3, 3))
    with pytest.raises(ValueError):
        cumulant(lat, [0, 1], "degree")
