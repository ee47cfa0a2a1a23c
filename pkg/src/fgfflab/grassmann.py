"""Exact finite-dimensional Grassmann algebra and Gaussian (Berezin) states.

Representation: an element is a dict from bitmask to coefficient.  Site s
owns two generators, the unbarred one on bit 2s and the barred one on bit
2s+1, and a mask stands for the product of its generators in increasing bit
order.  Every sign below is relative to that order:

  * multiplying masks a, b (disjoint) costs (-1)^(number of pairs i in a,
    j in b with i > j), accumulated as popcounts of shifted masks;
  * the left derivative by generator j moves it to the front past the
    lower bits of the mask, costing (-1)^popcount(mask below j);
  * full Berezin integration applies, for each site from the highest down,
    the unbarred derivative then the barred one.  Under this convention the
    integral of exp(sum A(u,v) psi_u psibar_v) is +det(A), which the tests
    check against direct elimination.

Coefficients are Fractions in exact mode, floats otherwise; the two modes
never mix inside one algebra.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from ._linalg import det_exact, inverse_exact
from .lattice import Edge, laplacian_dirichlet, laplacian_wired


class GrassmannAlgebra:
    def __init__(self, n_sites, exact=True):
        if n_sites < 0 or n_sites > 16:
            # 2*16 generators means masks up to 2^32 terms; exact work above
            # a dozen sites is already hopeless, so fail early
            raise ValueError("n_sites must be between 0 and 16")
        self.n_sites = n_sites
        self.exact = exact

    def coerce(self, x):
        return Fraction(x) if self.exact else float(x)

    def element(self, terms=None):
        el = GrassmannElement(self)
        if terms:
            for mask, c in terms.items():
                c = self.coerce(c)
                if c:
                    el.terms[mask] = c
        return el

    def zero(self):
        return GrassmannElement(self)

    def one(self):
        return self.element({0: 1})

    def scalar(self, c):
        return self.element({0: c})

    def psi(self, site):
        self._check_site(site)
        return self.element({1 << (2 * site): 1})

    def psibar(self, site):
        self._check_site(site)
        return self.element({1 << (2 * site + 1): 1})

    def _check_site(self, site):
        if not (0 <= site < self.n_sites):
            raise ValueError(f"site {site} outside 0..{self.n_sites - 1}")

    def quadratic_pairing(self, matrix):
        """sum_{u,v} A(u,v) psi_u psibar_v as an element.

        The mask for (u, v) is bit 2u with bit 2v+1; when u > v the barred
        generator's bit is lower, so storing in increasing bit order flips
        the coefficient's sign.
        """
        n = self.n_sites
        if len(matrix) != n or any(len(row) != n for row in matrix):
            raise ValueError("matrix shape must match the number of sites")
        el = self.zero()
        for u in range(n):
            for v in range(n):
                c = self.coerce(matrix[u][v])
                if not c:
                    continue
                mask = (1 << (2 * u)) | (1 << (2 * v + 1))
                el.terms[mask] = el.terms.get(mask, self.coerce(0)) + (c if u <= v else -c)
        el._strip()
        return el

    @property
    def full_mask(self):
        return (1 << (2 * self.n_sites)) - 1


def _merge_sign(a, b):
    # moves every generator of b past the generators of a above it
    s = 0
    bb = b
    while bb:
        j = (bb & -bb).bit_length() - 1
        s += (a >> (j + 1)).bit_count()
        bb &= bb - 1
    return -1 if s & 1 else 1


class GrassmannElement:
    __slots__ = ("algebra", "terms")

    def __init__(self, algebra):
        self.algebra = algebra
        self.terms = {}

    def _strip(self):
        dead = [m for m, c in self.terms.items() if not c]
        for m in dead:
            del self.terms[m]
        return self

    def copy(self):
        out = GrassmannElement(self.algebra)
        out.terms = dict(self.terms)
        return out

    def coefficient(self, mask):
        return self.terms.get(mask, self.algebra.coerce(0))

    def is_zero(self):
        return not self.terms

    def is_even(self):
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def __eq__(self, other):
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.terms == other.terms

    def __add__(self, other):
        if not isinstance(other, GrassmannElement):
            other = self.algebra.scalar(other)
        out = self.copy()
        for m, c in other.terms.items():
            out.terms[m] = out.terms.get(m, self.algebra.coerce(0)) + c
        return out._strip()

    __radd__ = __add__

    def __neg__(self):
        out = GrassmannElement(self.algebra)
        out.terms = {m: -c for m, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if not isinstance(other, GrassmannElement):
            other = self.algebra.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return self.algebra.scalar(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, GrassmannElement):
            c = self.algebra.coerce(other)
            out = GrassmannElement(self.algebra)
            if c:
                out.terms = {m: v * c for m, v in self.terms.items()}
            return out
        out = GrassmannElement(self.algebra)
        acc = out.terms
        zero = self.algebra.coerce(0)
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                if ma & mb:
                    continue
                m = ma | mb
                acc[m] = acc.get(m, zero) + ca * cb * _merge_sign(ma, mb)
        return out._strip()

    def __rmul__(self, other):
        # scalars commute; only elements need ordered multiplication
        return self * other

    def derivative_generator(self, j):
        """Left derivative by the generator on bit j."""
        out = GrassmannElement(self.algebra)
        bit = 1 << j
        below = bit - 1
        for m, c in self.terms.items():
            if m & bit:
                sign = -1 if (m & below).bit_count() & 1 else 1
                out.terms[m ^ bit] = sign * c
        return out

    def derivative(self, site, barred=False):
        return self.derivative_generator(2 * site + (1 if barred else 0))

    def exp(self):
        """Power series exp for even elements with no constant term."""
        if 0 in self.terms:
            raise ValueError("exp needs a vanishing constant term")
        if not self.is_even():
            raise ValueError("exp is only defined for even elements here")
        acc = self.algebra.one()
        power = self.algebra.one()
        for k in range(1, self.algebra.n_sites + 1):
            power = power * self
            if power.is_zero():
                break
            inv = Fraction(1, _factorial(k)) if self.algebra.exact else 1.0 / _factorial(k)
            acc = acc + power * inv
        return acc

    def berezin(self):
        """Integrate out every generator; returns a plain scalar.

        Applies, for each site from the top down, the unbarred derivative and
        then the barred one.  Equivalent to reading off the coefficient of
        the full mask, with sign +1 under this generator order; the loop form
        is kept because it is the definition the sign rules were checked
        against.
        """
        el = self
        for s in range(self.algebra.n_sites - 1, -1, -1):
            el = el.derivative(s, barred=False).derivative(s, barred=True)
        return el.terms.get(0, self.algebra.coerce(0))


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def gaussian_expectation(monomial, matrix):
    """Berezin integral of monomial * exp(quadratic pairing of matrix)."""
    alg = monomial.algebra
    return (monomial * alg.quadratic_pairing(matrix).exp()).berezin()


def wick_minor(matrix, rows_i, cols_j, exact=True):
    """Predicted integral of psi_{i1} psibar_{j1} ... psi_{im} psibar_{jm}
    against the Gaussian weight of `matrix`: det(A) times the (I, J) minor
    of the inverse-transpose, rows and columns in sequence order.  Returns 0
    when the index sequences have different lengths."""
    if len(rows_i) != len(cols_j):
        return Fraction(0) if exact else 0.0
    if exact:
        inv_t = [list(col) for col in zip(*inverse_exact(matrix))]
        sub = [[inv_t[i][j] for j in cols_j] for i in rows_i]
        return det_exact(matrix) * det_exact(sub)
    a = np.asarray(matrix, dtype=float)
    inv_t = np.linalg.inv(a).T
    sub = inv_t[np.ix_(list(rows_i), list(cols_j))]
    if sub.size == 0:
        return float(np.linalg.det(a))
    return float(np.linalg.det(a) * np.linalg.det(sub))


def wick_bilinear(matrix, bar_rows, unbar_cols, exact=True):
    """Same moment for linear combinations: the alpha-th factor pair is
    (psi^T C)_alpha (B psibar)_alpha with C = unbar_cols (n x m) and
    B = bar_rows (m x n).  Predicted value det(A) det(B A^-1 C)."""
    if exact:
        inv = inverse_exact(matrix)
        n = len(matrix)
        m = len(bar_rows)
        ba = [[sum(bar_rows[r][k] * inv[k][c] for k in range(n)) for c in range(n)] for r in range(m)]
        bac = [[sum(ba[r][k] * unbar_cols[k][c] for k in range(n)) for c in range(m)] for r in range(m)]
        return det_exact(matrix) * det_exact(bac)
    a = np.asarray(matrix, dtype=float)
    b = np.asarray(bar_rows, dtype=float)
    c = np.asarray(unbar_cols, dtype=float)
    core = b @ np.linalg.inv(a) @ c
    if core.size == 0:
        return float(np.linalg.det(a))
    return float(np.linalg.det(a) * np.linalg.det(core))


def site_algebra(lat, exact=True, with_ghost=False):
    return GrassmannAlgebra(lat.n_vertices + (1 if with_ghost else 0), exact=exact)


def dirichlet_state(observable, lat, normalized=True):
    """Gaussian expectation with weight exp of the negated Dirichlet
    Laplacian quadratic form; the algebra must have exactly one site per
    lattice vertex."""
    alg = observable.algebra
    if alg.n_sites != lat.n_vertices:
        raise ValueError("algebra size must equal the vertex count")
    neg_lap = [[-x for x in row] for row in laplacian_dirichlet(lat, exact=True)]
    weight = alg.quadratic_pairing(neg_lap).exp()
    val = (observable * weight).berezin()
    if normalized:
        val = val / _tree_count(lat, alg.exact)
    return val


def pinned_state(observable, lat, normalized=True):
    """Expectation in the ghost-extended algebra: the weight is the negated
    wired Laplacian plus a unit pairing at the ghost, under a ghost-pair
    prefactor that pins the extra zero mode.  The ghost is the last site.
    Agrees with dirichlet_state on even observables supported on the patch.
    """
    alg = observable.algebra
    n = lat.n_vertices
    if alg.n_sites != n + 1:
        raise ValueError("algebra must have one extra site for the ghost")
    mat = [[-x for x in row] for row in laplacian_wired(lat, exact=True)]
    mat[n][n] += 1
    weight = alg.quadratic_pairing(mat).exp()
    pin = alg.psi(n) * alg.psibar(n)
    val = (pin * weight * observable).berezin()
    if normalized:
        val = val / _tree_count(lat, alg.exact)
    return val


def _tree_count(lat, exact):
    neg_lap = [[-x for x in row] for row in laplacian_dirichlet(lat, exact=True)]
    d = det_exact(neg_lap)
    return d if exact else float(d)


def gradient_pair(algebra, lat, edge):
    """(psi_tip - psi_base)(psibar_tip - psibar_base) with zero extension:
    a tip outside the patch contributes no generator, leaving
    psi_base psibar_base.  Ghost-extended algebras still zero-extend; the
    ghost site never appears in observables."""
    tip = lat.edge_tip_id(edge)
    base = edge.base
    if tip is None:
        return algebra.psi(base) * algebra.psibar(base)
    return (algebra.psi(tip) - algebra.psi(base)) * (algebra.psibar(tip) - algebra.psibar(base))


def degree_field(algebra, lat, v):
    """Average of the gradient pairs over the star at v; represents the
    spanning-tree degree of v divided by the coordination number."""
    c = lat.coordination
    acc = algebra.zero()
    for e in lat.edge_star(v):
        acc = acc + gradient_pair(algebra, lat, e)
    w = Fraction(1, c) if algebra.exact else 1.0 / c
    return acc * w


def height_one_weight_marked(algebra, lat, v, direction=0):
    """One marked edge present, every other star edge absent: the gradient
    pair of the marked edge times the product of (1 - gradient pair) over
    the rest of the star.  Its expectation is the probability that the tree
    meets the star in exactly the marked edge, which does not depend on the
    mark and equals the height-one probability at v."""
    acc = gradient_pair(algebra, lat, Edge(v, direction))
    for e in lat.edge_star(v):
        if e.direction != direction:
            acc = acc * (algebra.one() - gradient_pair(algebra, lat, e))
    return acc


def height_one_weight(algebra, lat, v):
    """Mark-averaged height-one observable at v: the mean over the star of
    height_one_weight_marked.  Expanding the product and integrating term
    by term reproduces the direction-averaged determinant formula."""
    c = lat.coordination
    acc = algebra.zero()
    for k in range(c):
        acc = acc + height_one_weight_marked(algebra, lat, v, k)
    w = Fraction(1, c) if algebra.exact else 1.0 / c
    return acc * w
