"""Sandpile dynamics, recurrent-state enumeration, and the two samplers."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgfflab._linalg import det_exact
from fgfflab.lattice import Edge, build_box, laplacian_dirichlet
from fgfflab.moments import degree_moment, height_one_prob, spanning_tree_edge_prob
from fgfflab.samplers import (
    chain_sample,
    enumerate_recurrent,
    is_recurrent,
    recurrent_degree_moment,
    recurrent_heights_array,
    recurrent_indicator_moment,
    stabilize,
    wilson_sample,
)


# -- stabilization ----------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(
    heights=st.lists(st.integers(min_value=1, max_value=12), min_size=4, max_size=4),
    seed_a=st.integers(min_value=0, max_value=2**16),
    seed_b=st.integers(min_value=0, max_value=2**16),
)
def test_stabilize_is_schedule_independent(heights, seed_a, seed_b):
    lat = build_box(2, (2, 2))
    base = stabilize(lat, heights)
    assert stabilize(lat, heights, schedule_seed=seed_a) == base
    assert stabilize(lat, heights, schedule_seed=seed_b) == base
    final, topples = base
    assert all(1 <= h <= lat.coordination for h in final) or any(
        h < 1 for h in heights
    )
    assert topples >= 0


def test_stabilize_fixed_point_and_mass_loss():
    lat = build_box(2, (2, 2))
    stable = (4, 4, 4, 4)
    assert stabilize(lat, stable) == (stable, 0)
    # each topple at a 2x2 corner loses two grains to the ghost
    final, topples = stabilize(lat, (5, 4, 4, 4))
    assert topples > 0
    assert sum(final) == sum((5, 4, 4, 4)) - 2 * topples


def test_stabilize_rejects_wrong_length():
    lat = build_box(2, (2, 2))
    with pytest.raises(ValueError):
        stabilize(lat, (4, 4, 4))


# -- recurrence -------------------------------------------------------------

def test_burning_test_on_smallest_box():
    lat = build_box(2, (1, 2))
    stable = [(a, b) for a in range(1, 5) for b in range(1, 5)]
    recurrent = [h for h in stable if is_recurrent(lat, h)]
    # only the all-ones state fails the burning test here
    assert (1, 1) not in recurrent
    assert len(recurrent) == 15


def test_vectorized_enumeration_matches_generator():
    for sides in ((1, 2), (2, 2), (2, 3)):
        lat = build_box(2, sides)
        vec = {tuple(int(x) for x in row) for row in recurrent_heights_array(lat)}
        gen = set(enumerate_recurrent(lat))
        assert vec == gen


def test_recurrent_count_equals_tree_count():
    # Kirchhoff: recurrent states biject with wired spanning trees; the
    # stored operator is the negative Laplacian, so negate before det
    for sides in ((2, 3), (3, 3)):
        lat = build_box(2, sides)
        neg = [[-x for x in row] for row in laplacian_dirichlet(lat, exact=True)]
        assert recurrent_heights_array(lat).shape[0] == det_exact(neg)
    assert recurrent_heights_array(build_box(2, (3, 3))).shape[0] == 100352


def test_indicator_moment_known_values():
    lat = build_box(2, (1, 2))
    assert recurrent_indicator_moment(lat, [0]) == Fraction(1, 5)
    assert recurrent_indicator_moment(lat, [0], height=4) == Fraction(4, 15)
    lat23 = build_box(2, (2, 3))
    assert recurrent_indicator_moment(lat23, [lat23.vertex_id((1, 1))]) == Fraction(
        99, 805
    )


def test_degree_moment_enumeration_matches_determinant():
    lat = build_box(2, (2, 2))
    for vs in ([0], [0, 3]):
        assert recurrent_degree_moment(lat, vs) == degree_moment(lat, vs, exact=True)


def test_enumeration_cap_guards():
    lat = build_box(2, (5, 5))  # 4^25 states
    with pytest.raises(ValueError):
        recurrent_heights_array(lat)
    with pytest.raises(ValueError):
        list(enumerate_recurrent(lat))
    with pytest.raises(ValueError):
        recurrent_degree_moment(lat, [0])


# -- Markov chain sampler ---------------------------------------------------

def test_chain_sampler_is_deterministic():
    lat = build_box(2, (2, 2))
    a = chain_sample(lat, 20000, seed=7)
    b = chain_sample(lat, 20000, seed=7)
    assert np.array_equal(a.freq, b.freq)
    assert np.array_equal(a.batch_counts, b.batch_counts)
    c = chain_sample(lat, 20000, seed=8)
    assert not np.array_equal(a.freq, c.freq)


def test_chain_sampler_hits_exact_height_probabilities():
    lat = build_box(2, (2, 2))
    res = chain_sample(lat, 200000, seed=11)
    exact = np.array([float(height_one_prob(lat, [v], exact=True)) for v in range(4)])
    z = np.abs(res.freq - exact) / res.stderr
    assert z.max() < 5.0


def test_chain_sampler_validates_burn_in():
    lat = build_box(2, (2, 2))
    with pytest.raises(ValueError):
        chain_sample(lat, 1000, seed=1, burn_in=1000)


# -- Wilson sampler ---------------------------------------------------------

def test_wilson_sampler_is_deterministic():
    lat = build_box(2, (2, 2))
    edges = (Edge(0, 0), Edge(3, 2))
    a = wilson_sample(lat, 5000, seed=3, edges=edges)
    b = wilson_sample(lat, 5000, seed=3, edges=edges)
    assert np.array_equal(a.edge_freq, b.edge_freq)
    assert np.array_equal(a.degree_mean, b.degree_mean)


def test_wilson_sampler_hits_determinant_predictions():
    lat = build_box(2, (2, 2))
    edges = (Edge(0, 0), Edge(3, 2))
    res = wilson_sample(lat, 40000, seed=5, edges=edges)
    for i, e in enumerate(edges):
        p = spanning_tree_edge_prob(lat, [e])
        z = abs(res.edge_freq[i] - p) / res.edge_stderr[i]
        assert z < 5.0
    exact_deg = np.array(
        [4 * float(degree_moment(lat, [v], exact=True)) for v in range(4)]
    )
    z = np.abs(res.degree_mean - exact_deg) / res.degree_stderr
    assert z.max() < 5.0


def test_wilson_sampler_without_tracked_edges():
    lat = build_box(2, (1, 2))
    res = wilson_sample(lat, 100, seed=1)
    assert res.edge_freq.shape == (0,)
    assert res.degree_mean.shape == (2,)
