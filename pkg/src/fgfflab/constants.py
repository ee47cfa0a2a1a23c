"""Lattice constants that normalize the height-one field in the scaling
limit, with a per-subset evaluation ledger.

Each constant is a signed, size-weighted sum over subsets of the edge star
at the origin containing a fixed reference direction.  Every subset
contributes the principal minor of the infinite-volume transfer limit over
the subset minus the reference edge, plus correction minors in which the row
of a direction parallel (square case) or at an angle (six-neighbor case) to
the reference is overwritten by the reference row, weighted by the cosine of
the angle between them.

On Z^2 the whole computation runs exactly in the ring of polynomials in
1/pi with rational coefficients, so the classical closed form 2/pi - 4/pi^2
is reproduced identically, not just numerically.  The six-neighbor constant
uses quadrature values of the triangular kernel and lands at float accuracy.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .greenfn import transfer_limit, transfer_limit_z2_exact


class PiPoly:
    """Polynomial in 1/pi with Fraction coefficients: c0 + c1/pi + c2/pi^2 ..."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def constant(cls, c):
        return cls((c,))

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return PiPoly(
            [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
        )

    __radd__ = __add__

    def __neg__(self):
        return PiPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return PiPoly(())
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
        return PiPoly(out)

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, PiPoly):
            return other
        return PiPoly((Fraction(other),))

    def __eq__(self, other):
        return self.coeffs == self._coerce(other).coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __float__(self):
        return float(sum(float(c) * math.pi**-i for i, c in enumerate(self.coeffs)))

    def __repr__(self):
        if not self.coeffs:
            return "PiPoly(0)"
        parts = [f"{c}/pi^{i}" if i else f"{c}" for i, c in enumerate(self.coeffs) if c]
        return "PiPoly(" + " + ".join(parts) + ")"


def _det_generic(rows):
    """Leibniz determinant over any commutative ring; sizes stay tiny."""
    n = len(rows)
    if n == 0:
        return 1
    total = None
    for perm in itertools.permutations(range(n)):
        sign = _perm_sign_tuple(perm)
        prod = rows[0][perm[0]]
        for i in range(1, n):
            prod = prod * rows[i][perm[i]]
        prod = prod * sign
        total = prod if total is None else total + prod
    return total


def _perm_sign_tuple(perm):
    seen = [False] * len(perm)
    sign = 1
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass
class ConstantResult:
    kind: str
    value: float
    exact: object = None  # PiPoly on Z^2, else None
    closed_form: float = None
    subset_terms: list = field(default_factory=list)
    note: str = ""


C2_CLOSED = PiPoly((0, 2, -4))  # 2/pi - 4/pi^2
HEIGHT_ONE_Z2_CLOSED = PiPoly((0, 0, 2, -4))  # 2/pi^2 - 4/pi^3

CT_CLOSED = (
    -Fraction(25, 36)
    + 162 / math.pi**4
    - 99 * math.sqrt(3.0) / math.pi**3
    + Fraction(99, 2) / math.pi**2
    - Fraction(5, 4) / (math.sqrt(3.0) * math.pi)
)
CT_CLOSED = float(CT_CLOSED)

TRIANGULAR_HEIGHT_FACTOR = 1.0 / 18.0 + 1.0 / (math.sqrt(3.0) * math.pi)


def _transfer_star_matrix(kind, dim, exact):
    """Infinite-volume transfer limit over the full edge star at the origin."""
    c = 6 if kind == "triangular" else 2 * dim
    if exact:
        if not (kind == "hypercubic" and dim == 2):
            raise ValueError("exact star matrix only exists on Z^2")
        return [
            [PiPoly(transfer_limit_z2_exact(i, j)) for j in range(c)] for i in range(c)
        ]
    return [[transfer_limit(kind, dim, i, j) for j in range(c)] for i in range(c)]


def _weighted_subset_sum(mat, c, corrections, prefactor_inv, exact):
    """Shared assembly: subsets of the star containing direction 0.

    corrections maps a direction index to its cosine weight; for each subset
    containing that direction the minor with its row overwritten by row 0 is
    added with that weight.  Returns (value, ledger rows).
    """

    def minor(rows_idx, swap_src=None):
        sub = []
        for i in rows_idx:
            # the swapped row is read from the reference direction instead
            row_origin = 0 if i == swap_src else i
            sub.append([mat[row_origin][j] for j in rows_idx])
        return _det_generic(sub)

    total = None
    ledger = []
    rest = list(range(1, c))
    for mask in range(1 << (c - 1)):
        subset = [0] + [rest[i] for i in range(c - 1) if mask >> i & 1]
        size = len(subset)
        body = subset[1:]
        base = minor(body)
        term = base
        row = {"subset": tuple(subset), "size": size, "base_minor": float(base)}
        for direction, cosine in corrections.items():
            if direction in body:
                corr = minor(body, swap_src=direction)
                term = term + cosine * corr
                row[f"swap_{direction}"] = float(corr)
        sign = -1 if size % 2 else 1
        contrib = term * (sign * size)
        row["contribution"] = float(contrib)
        ledger.append(row)
        total = contrib if total is None else total + contrib
    if exact:
        value = total * Fraction(1, prefactor_inv)
    else:
        value = total * (1.0 / prefactor_inv)
    return value, ledger


def height_constant_hypercubic(d, exact=None):
    """The height-one normalization constant on Z^d.

    d = 2 defaults to the exact path and carries the closed form; d >= 3 is
    float only (the Green's values come from Bessel quadrature).
    """
    if exact is None:
        exact = d == 2
    if exact and d != 2:
        raise ValueError("exact evaluation is only available for d = 2")
    mat = _transfer_star_matrix("hypercubic", d, exact)
    c = 2 * d
    # the unique direction antiparallel to direction 0 gets cosine -(-1) = +1
    corrections = {d: PiPoly.constant(1) if exact else 1.0}
    value, ledger = _weighted_subset_sum(mat, c, corrections, d, exact)
    if exact:
        return ConstantResult(
            kind="z2",
            value=float(value),
            exact=value,
            closed_form=float(C2_CLOSED),
            subset_terms=ledger,
            note="exact in the ring of rational polynomials in 1/pi",
        )
    return ConstantResult(kind=f"z{d}", value=float(value), subset_terms=ledger)


def height_constant_triangular():
    """Six-neighbor analogue: every non-reference direction in the subset
    contributes a swapped minor weighted by minus the cosine of its angle to
    the reference direction."""
    mat = _transfer_star_matrix("triangular", 2, exact=False)
    corrections = {alpha: -math.cos(alpha * math.pi / 3.0) for alpha in range(1, 6)}
    value, ledger = _weighted_subset_sum(mat, 6, corrections, 2, exact=False)
    return ConstantResult(
        kind="tri",
        value=float(value),
        closed_form=CT_CLOSED,
        subset_terms=ledger,
        note="kernel values from Brillouin-zone quadrature",
    )


def square_degeneration_constant(exact=True):
    """The six-neighbor formula degenerated to four directions: cosines of
    multiples of pi/2 instead of pi/3.  Must reproduce the Z^2 constant; on
    the exact path the match is coefficient-by-coefficient."""
    mat = _transfer_star_matrix("hypercubic", 2, exact)
    if exact:
        corrections = {
            1: PiPoly.constant(0),
            2: PiPoly.constant(1),
            3: PiPoly.constant(0),
        }
    else:
        corrections = {alpha: -math.cos(alpha * math.pi / 2.0) for alpha in range(1, 4)}
    value, ledger = _weighted_subset_sum(mat, 4, corrections, 2, exact)
    return ConstantResult(
        kind="z2-degenerate",
        value=float(value),
        exact=value if exact else None,
        closed_form=float(C2_CLOSED),
        subset_terms=ledger,
        note="four-direction degeneration of the six-direction formula",
    )


def height_one_infinite_z2(exact=True):
    """Single-site height-one probability in infinite volume, by
    inclusion-exclusion over the star minus one reference edge.  The closed
    value 2/pi^2 - 4/pi^3 anchors the transfer-limit sign convention."""
    mat = _transfer_star_matrix("hypercubic", 2, exact)
    rest = [1, 2, 3]
    total = None
    for mask in range(8):
        body = [rest[i] for i in range(3) if mask >> i & 1]
        sub = [[mat[i][j] for j in body] for i in body]
        sign = -1 if len(body) % 2 else 1
        term = _det_generic(sub) * sign
        total = term if total is None else total + term
    if exact and not isinstance(total, PiPoly):
        total = PiPoly.constant(total)
    return total


def triangular_height_one_infinite():
    """Single-site height-one probability on the six-neighbor lattice,
    predicted by the constant through the closed factor 1/18 + 1/(sqrt3 pi)."""
    return height_constant_triangular().value * TRIANGULAR_HEIGHT_FACTOR


def constant_for(kind):
    if kind == "z2":
        return height_constant_hypercubic(2)
    if kind == "z3":
        return height_constant_hypercubic(3, exact=False)
    if kind == "z4":
        return height_constant_hypercubic(4, exact=False)
    if kind == "tri":
        return height_constant_triangular()
    raise ValueError("kind must be one of z2, z3, z4, tri")
