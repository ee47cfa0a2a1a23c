"""Determinantal moment formulas for spanning-tree edge indicators, the
degree field, and the height-one field on a finite patch with wired boundary.

All formulas reduce to minors of the transfer matrix M(f, g), the double
gradient of the Dirichlet Green's function.  Directed edges whose unoriented
supports collide make the minor vanish by antisymmetry (M(-f, g) = -M(f, g)),
so no explicit deduplication happens here; the good-set precondition on
vertex families rules collisions out in every probabilistic use.

Subset sums are enumerated in bitmask order.  Float minors of equal size are
batched through numpy's stacked determinant; exact mode walks subsets one by
one with rational elimination and is meant for small pools only.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np

from ._linalg import det_exact
from .greenfn import green_for_edges, transfer_matrix
from .lattice import is_good_set

MAX_SUBSET_POOL = 20


def spanning_tree_edge_prob(lat, edges, green=None, exact=False):
    """Probability that every listed directed edge lies in the wired uniform
    spanning tree, as the principal transfer-matrix minor.  Listing the same
    unoriented edge twice (either orientation) yields 0, which is the minor's
    value, not the probability."""
    edges = list(edges)
    if green is None:
        green = green_for_edges(lat, edges, exact=exact)
    mat = transfer_matrix(green, lat, edges)
    if exact:
        return det_exact(mat)
    return float(np.linalg.det(mat)) if len(edges) else 1.0


def degree_moment(lat, vertex_ids, green=None, exact=False, check_good=True):
    """E over the spanning tree of prod_v deg(v) / coordination, for a good
    vertex family: the direction-averaged sum of transfer minors with one
    edge chosen at each vertex."""
    vs = list(vertex_ids)
    if check_good and not is_good_set(lat, vs):
        raise ValueError("vertex family must be good (distinct, non-adjacent, non-separating)")
    pool = lat.edge_set(vs)
    if green is None:
        green = green_for_edges(lat, pool, exact=exact)
    mat = transfer_matrix(green, lat, pool)
    c = lat.coordination
    n = len(vs)
    index = {e: i for i, e in enumerate(pool)}
    total = Fraction(0) if exact else 0.0
    for choice in itertools.product(range(c), repeat=n):
        idx = [index[(vs[i], choice[i])] for i in range(n)]
        total += _minor(mat, idx, exact)
    w = Fraction(1, c**n) if exact else 1.0 / c**n
    return total * w


def _minor(mat, idx, exact):
    if exact:
        return det_exact([[mat[i][j] for j in idx] for i in idx])
    if not idx:
        return 1.0
    sub = mat[np.ix_(idx, idx)]
    return float(np.linalg.det(sub))


def _subset_alternating_sum(mat, pool_idx, fixed_idx, exact):
    """sum over A subsets of pool of (-1)^|A| det(M restricted to fixed + A).

    Floats batch the minors by subset size; exact mode enumerates directly.
    """
    k = len(pool_idx)
    if k > MAX_SUBSET_POOL:
        raise ValueError(f"subset pool of {k} edges exceeds the supported {MAX_SUBSET_POOL}")
    if exact:
        total = Fraction(0)
        for r in range(k + 1):
            sign = -1 if r % 2 else 1
            for combo in itertools.combinations(pool_idx, r):
                total += sign * det_exact(
                    [[mat[i][j] for j in fixed_idx + list(combo)] for i in fixed_idx + list(combo)]
                )
        return total
    total = 0.0
    for r in range(k + 1):
        sign = -1.0 if r % 2 else 1.0
        combos = list(itertools.combinations(pool_idx, r))
        m = len(fixed_idx) + r
        if m == 0:
            total += sign * len(combos)
            continue
        stack = np.empty((len(combos), m, m))
        for t, combo in enumerate(combos):
            idx = fixed_idx + list(combo)
            stack[t] = mat[np.ix_(idx, idx)]
        total += sign * float(np.linalg.det(stack).sum())
    return total


def _resolve_eta(lat, vs, eta):
    if eta is None:
        return [0] * len(vs)
    if isinstance(eta, dict):
        return [eta[v] for v in vs]
    eta = list(eta)
    if len(eta) != len(vs):
        raise ValueError("eta needs one direction index per vertex")
    return eta


def height_one_prob(lat, vertex_ids, eta=None, green=None, exact=False, check_good=True):
    """P(height = 1 on all of V) by inclusion-exclusion over the edges not
    marked by eta: sum over A of (-1)^|A| det(M)_A with A running through
    subsets of E(V) minus one marked edge per vertex.  The value does not
    depend on the marking; the default marks direction 0 everywhere."""
    vs = list(vertex_ids)
    if check_good and not is_good_set(lat, vs):
        raise ValueError("vertex family must be good (distinct, non-adjacent, non-separating)")
    marks = _resolve_eta(lat, vs, eta)
    pool_edges = lat.edge_set(vs)
    if green is None:
        green = green_for_edges(lat, pool_edges, exact=exact)
    mat = transfer_matrix(green, lat, pool_edges)
    index = {e: i for i, e in enumerate(pool_edges)}
    marked = {(vs[i], marks[i]) for i in range(len(vs))}
    pool_idx = [index[e] for e in pool_edges if (e.base, e.direction) not in marked]
    return _subset_alternating_sum(mat, pool_idx, [], exact)


def height_one_moment(lat, vertex_ids, green=None, exact=False, check_good=True):
    """Same probability computed as the direction-averaged moment: for each
    marking eta, subsets A avoid the marked edges but the minors include
    them.  Averaging over all markings reproduces height_one_prob; keeping
    both routes separate is deliberate, the tests compare them."""
    vs = list(vertex_ids)
    if check_good and not is_good_set(lat, vs):
        raise ValueError("vertex family must be good (distinct, non-adjacent, non-separating)")
    pool_edges = lat.edge_set(vs)
    if green is None:
        green = green_for_edges(lat, pool_edges, exact=exact)
    mat = transfer_matrix(green, lat, pool_edges)
    index = {e: i for i, e in enumerate(pool_edges)}
    c = lat.coordination
    n = len(vs)
    total = Fraction(0) if exact else 0.0
    for marks in itertools.product(range(c), repeat=n):
        fixed_idx = [index[(vs[i], marks[i])] for i in range(n)]
        marked = set(fixed_idx)
        pool_idx = [i for i in range(len(pool_edges)) if i not in marked]
        total += _subset_alternating_sum(mat, pool_idx, fixed_idx, exact)
    w = Fraction(1, c**n) if exact else 1.0 / c**n
    return total * w
