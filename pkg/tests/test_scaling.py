"""Disk scaling experiments: point mapping, conformal targets, smearing."""

import math

import pytest

from fgfflab.cumulants import cumulant
from fgfflab.lattice import is_good_set
from fgfflab.scaling import (
    BumpFunction,
    build_disk_lattice,
    continuum_cumulant,
    convergence_sweep,
    lattice_cumulant_at,
    map_point,
    normalization_audit,
    parse_mesh,
    smeared_cumulant,
)


def test_parse_mesh_accepts_fractions_and_decimals():
    assert parse_mesh("1/16") == 0.0625
    assert parse_mesh(" 1/32 ") == 0.03125
    assert parse_mesh("0.05") == 0.05


def test_map_point_floors_both_coordinates():
    assert map_point((0.3, 0.0), 1 / 16) == (4, 0)
    assert map_point((-0.3, 0.0), 1 / 16) == (-5, 0)
    assert map_point((0.99, -0.01), 0.5) == (1, -1)


def test_disk_lattice_shape_and_cache():
    lat = build_disk_lattice(1 / 4)
    pts = {(x, y) for x in range(-4, 5) for y in range(-4, 5) if x * x + y * y < 16}
    assert lat.n_vertices == len(pts)
    assert (0, 0) in pts and lat.vertex_id((0, 0)) >= 0
    # boundary vertices see the wired ghost
    assert (lat.neighbor_ids < 0).any()
    assert build_disk_lattice(1 / 4) is lat


def test_point_validation():
    with pytest.raises(ValueError):
        continuum_cumulant("degree", [(0.3, 0.0), (1.2, 0.0)])
    with pytest.raises(ValueError):
        continuum_cumulant("degree", [(0.3, 0.0), (0.3, 0.0)])
    with pytest.raises(ValueError):
        continuum_cumulant("degree", [(0.3, 0.0)])
    with pytest.raises(ValueError):
        continuum_cumulant("charge", [(0.3, 0.0), (-0.3, 0.0)])


def test_lattice_cumulant_rejects_colliding_or_adjacent_points():
    with pytest.raises(ValueError):
        lattice_cumulant_at("degree", [(0.1, 0.1), (0.12, 0.12)], 1 / 4)
    with pytest.raises(ValueError):
        lattice_cumulant_at("degree", [(0.1, 0.1), (0.1, 0.3)], 1 / 4)


def test_lattice_cumulant_matches_front_door():
    eps = 1 / 8
    pts = [(-0.3, 0.0), (0.3, 0.0)]
    lat = build_disk_lattice(eps)
    ids = [lat.vertex_id(map_point(p, eps)) for p in pts]
    assert is_good_set(lat, ids)
    direct = float(cumulant(lat, ids, "neg_degree", "closed"))
    scaled = lattice_cumulant_at("neg_degree", pts, eps)
    assert abs(scaled - direct * eps**-4) < 1e-12 * abs(scaled)


def test_continuum_target_rotation_invariance():
    base = continuum_cumulant("neg_degree", [(-0.3, 0.0), (0.3, 0.0)])
    for theta in (0.37, 1.1, 2.6):
        c, s = math.cos(theta), math.sin(theta)
        rot = [(-0.3 * c, -0.3 * s), (0.3 * c, 0.3 * s)]
        assert abs(continuum_cumulant("neg_degree", rot) - base) < 1e-12 * abs(base)


def test_continuum_target_permutation_invariance():
    pts = [(-0.3, 0.0), (0.2, 0.3), (0.1, -0.4)]
    base = continuum_cumulant("degree", pts)
    swapped = continuum_cumulant("degree", [pts[2], pts[0], pts[1]])
    assert abs(swapped - base) < 1e-12 * abs(base)


def test_field_prefactor_relations():
    pts2 = [(-0.3, 0.0), (0.3, 0.0)]
    pts3 = [(-0.3, 0.0), (0.2, 0.3), (0.1, -0.4)]
    # degree and its negation share even cumulants and flip odd ones
    assert continuum_cumulant("degree", pts2) == continuum_cumulant("neg_degree", pts2)
    assert continuum_cumulant("degree", pts3) == -continuum_cumulant(
        "neg_degree", pts3
    )
    # the height-one target is the negated-degree one rescaled per slot
    from fgfflab.constants import height_constant_hypercubic

    c2 = height_constant_hypercubic(2).value
    ratio = continuum_cumulant("height1", pts2) / continuum_cumulant(
        "neg_degree", pts2
    )
    assert abs(ratio - (2 * c2) ** 2) < 1e-12


def test_convergence_sweep_rows():
    rows = convergence_sweep("neg_degree", [(-0.3, 0.0), (0.3, 0.0)], [1 / 8, 1 / 12])
    assert [r.eps for r in rows] == [1 / 8, 1 / 12]
    for r in rows:
        assert r.abs_error == abs(r.lattice_value - r.target)
        assert r.rel_error == r.abs_error / abs(r.target)


def test_normalization_audit_ratios_cluster():
    cfgs = [[(-0.3, 0.0), (0.3, 0.0)], [(-0.15, 0.26), (0.15, -0.26)]]
    ratios = normalization_audit("neg_degree", cfgs, 1 / 24)
    assert len(ratios) == 2
    assert max(ratios) - min(ratios) < 0.05


def test_bump_support_and_amplitude():
    b = BumpFunction(center=(0.2, -0.1), radius=0.25, amplitude=3.0)
    assert b((0.2, -0.1)) == 3.0
    assert b((0.2 + 0.25, -0.1)) == 0.0
    assert b((0.9, 0.9)) == 0.0
    half = b((0.2 + 0.125, -0.1))
    assert 0.0 < half < 3.0
    doubled = BumpFunction(center=(0.2, -0.1), radius=0.25, amplitude=6.0)
    assert doubled((0.2 + 0.125, -0.1)) == 2.0 * half


def test_quadrature_nodes_live_inside_support():
    b = BumpFunction(center=(0.0, 0.0), radius=0.3)
    nodes = b.quadrature_nodes(6)
    assert nodes
    for (x, y), w in nodes:
        assert x * x + y * y < 0.3**2
        assert w > 0.0
    # the node mass approaches the true integral as the grid refines
    coarse = sum(w for _pt, w in b.quadrature_nodes(8))
    fine = sum(w for _pt, w in b.quadrature_nodes(64))
    assert abs(coarse - fine) < 0.02 * abs(fine)


def test_smeared_cumulant_rejects_bad_supports():
    touching = [
        BumpFunction(center=(-0.2, 0.0), radius=0.25),
        BumpFunction(center=(0.2, 0.0), radius=0.25),
    ]
    with pytest.raises(ValueError):
        smeared_cumulant("neg_degree", touching, 1 / 12)
    leaking = [
        BumpFunction(center=(-0.4, 0.0), radius=0.2),
        BumpFunction(center=(0.85, 0.0), radius=0.2),
    ]
    with pytest.raises(ValueError):
        smeared_cumulant("neg_degree", leaking, 1 / 12)
    with pytest.raises(ValueError):
        smeared_cumulant("neg_degree", touching[:1], 1 / 12)


def test_smeared_cumulant_amplitude_linearity():
    bumps = [
        BumpFunction(center=(-0.45, 0.0), radius=0.2),
        BumpFunction(center=(0.45, 0.0), radius=0.2),
    ]
    scaled = [
        BumpFunction(center=(-0.45, 0.0), radius=0.2, amplitude=2.5),
        bumps[1],
    ]
    lat0, cont0 = smeared_cumulant("neg_degree", bumps, 1 / 12, per_axis=3)
    lat1, cont1 = smeared_cumulant("neg_degree", scaled, 1 / 12, per_axis=3)
    assert abs(lat1 - 2.5 * lat0) < 1e-12 * abs(lat1)
    assert abs(cont1 - 2.5 * cont0) < 1e-12 * abs(cont1)
