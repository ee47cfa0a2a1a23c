"""Joint cumulants of the degree and height-one fields on a finite patch.

Two independent routes are kept side by side on purpose:

  * the partition route turns joint moments into cumulants through the
    alternating sum over set partitions, knowing nothing about the fields
    beyond their moment functions;
  * the closed route evaluates the collapsed formulas directly, a cyclic
    sum of transfer-matrix products for the degree field and a connected
    permutation sum with per-vertex subset weights for the height-one field.

They must agree to near machine precision, and the acceptance tests insist
on it.  Do not merge them.

The connected sum itself has two interchangeable evaluators: literal
enumeration of permutations filtered by connectivity, and the partition
inversion that writes the connected part as signed products of determinants.
Enumeration is the reference; inversion is what makes six-neighbor lattices
affordable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._linalg import det_exact
from .combinatorics import (
    classify_permutation,
    cyclic_permutations,
    partition_alternating_sum,
    permutation_sign,
    permutations_of,
)
from .greenfn import green_for_edges, transfer_matrix
from .lattice import is_good_set
from .moments import degree_moment, height_one_moment

FIELD_KINDS = ("degree", "neg_degree", "height1")


@dataclass
class CumulantReport:
    """Value plus enough provenance to audit how it was produced."""

    field: str
    vertex_ids: tuple
    value: object
    method: str
    term_count: int
    max_term: float
    note: str = ""

    def __float__(self):
        return float(self.value)


def cumulant_from_moments(moment_fn, items):
    """Joint cumulant via the alternating partition sum over joint moments."""
    return partition_alternating_sum(lambda block: moment_fn(block), items)


def _field_moment_fn(lat, field, green, exact):
    if field in ("degree", "neg_degree"):
        sign_one = -1 if field == "neg_degree" else 1

        def fn(block):
            m = degree_moment(lat, block, green=green, exact=exact, check_good=False)
            return m * (sign_one ** len(block))

        return fn
    if field == "height1":
        return lambda block: height_one_moment(lat, block, green=green, exact=exact, check_good=False)
    raise ValueError(f"unknown field kind {field!r}")


def cumulant_partition(lat, vertex_ids, field, green=None, exact=False, check_good=True):
    """Cumulant through joint moments; the slow but assumption-free route."""
    vs = tuple(vertex_ids)
    if check_good and not is_good_set(lat, vs):
        raise ValueError("vertex family must be good")
    if green is None:
        green = green_for_edges(lat, lat.edge_set(vs), exact=exact)
    fn = _field_moment_fn(lat, field, green, exact)
    val = cumulant_from_moments(fn, vs)
    return CumulantReport(
        field=field,
        vertex_ids=vs,
        value=val,
        method="moment-partition",
        term_count=_bell_number(len(vs)),
        max_term=float("nan"),
    )


def _bell_number(n):
    bells = [1]
    for i in range(n):
        bells.append(sum(math.comb(i, j) * bells[j] for j in range(i + 1)))
    return bells[n]


def degree_cumulant_closed(lat, vertex_ids, green=None, exact=False, negated=False, check_good=True):
    """Closed cyclic formula for the degree field cumulant.

    For the negated field the value is minus coordination^-n times the sum
    over full cycles sigma on V and direction choices eta of the product of
    transfer entries M(edge at v, edge at sigma v); the plain field flips
    the overall sign by (-1)^n.  A single vertex falls back to the moment,
    which is the first cumulant by definition.
    """
    vs = tuple(vertex_ids)
    if check_good and not is_good_set(lat, vs):
        raise ValueError("vertex family must be good")
    field = "neg_degree" if negated else "degree"
    pool = lat.edge_set(vs)
    if green is None:
        green = green_for_edges(lat, pool, exact=exact)
    n = len(vs)
    c = lat.coordination
    if n == 1:
        m = degree_moment(lat, vs, green=green, exact=exact, check_good=False)
        val = -m if negated else m
        return CumulantReport(field, vs, val, "n1-moment", 1, abs(float(val)),
                              note="first cumulant equals the mean")
    mat = transfer_matrix(green, lat, pool)
    index = {e: i for i, e in enumerate(pool)}
    total = Fraction(0) if exact else 0.0
    terms = 0
    biggest = 0.0
    for sigma in cyclic_permutations(vs):
        for eta in itertools.product(range(c), repeat=n):
            dir_of = {v: eta[i] for i, v in enumerate(vs)}
            prod = Fraction(1) if exact else 1.0
            for v in vs:
                w = sigma[v]
                prod *= mat[index[(v, dir_of[v])]][index[(w, dir_of[w])]] if exact else mat[
                    index[(v, dir_of[v])], index[(w, dir_of[w])]
                ]
            total += prod
            terms += 1
            biggest = max(biggest, abs(float(prod)))
    scale = Fraction(1, c**n) if exact else 1.0 / c**n
    val = -total * scale
    if not negated:
        val = val * ((-1) ** n)
    return CumulantReport(field, vs, val, "closed-cyclic", terms, biggest)


def _connected_sum_enumerate(mat, index, edges, owner, exact):
    """sum over connected permutations tau of sign(tau) prod M(f, tau f)."""
    total = Fraction(0) if exact else 0.0
    biggest = 0.0
    terms = 0
    for tau in permutations_of(edges):
        if not classify_permutation(tau, owner).connected:
            continue
        prod = permutation_sign(tau) * (Fraction(1) if exact else 1.0)
        for f, g in tau.items():
            prod *= mat[index[f]][index[g]] if exact else mat[index[f], index[g]]
        total += prod
        terms += 1
        biggest = max(biggest, abs(float(prod)))
    return total, terms, biggest


def _connected_sum_mobius(mat, index, family, exact):
    """Same connected sum via partition inversion: full permutation sums are
    determinants block by block, and the alternating partition sum keeps
    exactly the connected part."""
    vs = list(family)

    def block_det(block):
        idx = [index[f] for v in block for f in family[v]]
        if exact:
            return det_exact([[mat[i][j] for j in idx] for i in idx])
        if not idx:
            return 1.0
        return float(np.linalg.det(mat[np.ix_(idx, idx)]))

    val = partition_alternating_sum(block_det, vs)
    return val


def height_one_cumulant_closed(
    lat, vertex_ids, green=None, exact=False, method="auto", check_good=True
):
    """Closed connected formula for the height-one field cumulant, n >= 2:

        (-1/c)^n  sum over per-vertex nonempty edge subsets of
        prod_v (-1)^{|subset_v|} |subset_v|  times the connected
        permutation sum of the transfer matrix over the chosen edges.

    method picks the connected-sum evaluator: "enumerate" for the literal
    permutation walk, "mobius" for the determinant inversion, "auto" to
    enumerate only when the edge count stays small.  n = 1 falls back to the
    moment.
    """
    vs = tuple(vertex_ids)
    if check_good and not is_good_set(lat, vs):
        raise ValueError("vertex family must be good")
    pool = lat.edge_set(vs)
    if green is None:
        green = green_for_edges(lat, pool, exact=exact)
    n = len(vs)
    c = lat.coordination
    if n == 1:
        val = height_one_moment(lat, vs, green=green, exact=exact, check_good=False)
        return CumulantReport("height1", vs, val, "n1-moment", 1, abs(float(val)),
                              note="first cumulant equals the mean")
    if method not in ("auto", "enumerate", "mobius"):
        raise ValueError("method must be auto, enumerate, or mobius")
    mat = transfer_matrix(green, lat, pool)
    index = {e: i for i, e in enumerate(pool)}
    stars = {v: lat.edge_star(v) for v in vs}
    total = Fraction(0) if exact else 0.0
    terms = 0
    biggest = 0.0
    for picks in itertools.product(*(_nonempty_subsets(stars[v]) for v in vs)):
        family = {v: picks[i] for i, v in enumerate(vs)}
        edges = [f for sub in picks for f in sub]
        weight = 1
        for sub in picks:
            weight *= (-1) ** len(sub) * len(sub)
        use = method
        if use == "auto":
            use = "enumerate" if len(edges) <= 6 else "mobius"
        if use == "enumerate":
            owner = {f: f.base for f in edges}
            s, t, b = _connected_sum_enumerate(mat, index, edges, owner, exact)
            terms += t
            biggest = max(biggest, b)
        else:
            s = _connected_sum_mobius(mat, index, family, exact)
            terms += 1
            biggest = max(biggest, abs(float(s)))
        total += weight * s
    scale = Fraction(-1, c) ** n if exact else (-1.0 / c) ** n
    val = total * scale
    return CumulantReport("height1", vs, val, f"closed-connected-{method}", terms, biggest)


def _nonempty_subsets(star):
    out = []
    k = len(star)
    for mask in range(1, 1 << k):
        out.append(tuple(star[i] for i in range(k) if mask >> i & 1))
    return out


def cumulant(lat, vertex_ids, field="degree", method="closed", green=None, exact=False,
             connected_method="auto", check_good=True):
    """Front door: field in {degree, neg_degree, height1}, method in
    {closed, partition}."""
    if field not in FIELD_KINDS:
        raise ValueError(f"field must be one of {FIELD_KINDS}")
    if method == "partition":
        return cumulant_partition(lat, vertex_ids, field, green=green, exact=exact,
                                  check_good=check_good)
    if method != "closed":
        raise ValueError("method must be closed or partition")
    if field == "height1":
        return height_one_cumulant_closed(lat, vertex_ids, green=green, exact=exact,
                                          method=connected_method, check_good=check_good)
    return degree_cumulant_closed(lat, vertex_ids, green=green, exact=exact,
                                  negated=(field == "neg_degree"), check_good=check_good)
