"""Green's functions: finite patches, infinite lattices, and the unit disk.

Finite patches use the inverse of the negated Dirichlet Laplacian, either
dense (float or exact rational) or column-by-column through a cached sparse
LU factorization when only a few source vertices matter.

Infinite-lattice values come in three flavors.  On Z^2 and the triangular
lattice the Green's function itself diverges and the right object is the
potential kernel `a`; the infinite-volume limit of the double-gradient
transfer matrix is then minus the double gradient of a/(coordination).  In
dimensions >= 3 the Green's function exists and the transfer limit is its
double gradient directly.  Both facts are exercised against finite-volume
tables in the tests; the d = 2 sign is additionally pinned by two classical
constants, so treat it as load-bearing.
"""

from __future__ import annotations

import math
import weakref
from fractions import Fraction

import numpy as np
from scipy import integrate, sparse
from scipy.sparse.linalg import splu
from scipy.special import gammaln, ive, zeta

from ._linalg import inverse_exact
from .lattice import Edge, laplacian_dirichlet

DENSE_GREEN_LIMIT = 3200
KERNEL_RANGE_Z2 = 64

_EULER_GAMMA = 0.5772156649015328606

_splu_cache = weakref.WeakKeyDictionary()
_column_cache = weakref.WeakKeyDictionary()


class GreenTable:
    """Dirichlet Green's function values on a patch, by vertex id.

    Backed either by a full matrix (float ndarray or nested Fractions) or by
    a dict of columns.  Lookups with a None id return zero: that is the zero
    extension every gradient formula relies on.
    """

    def __init__(self, lat, matrix=None, columns=None, exact=False):
        self.lattice = lat
        self.matrix = matrix
        self.columns = columns
        self.exact = exact

    def _zero(self):
        return Fraction(0) if self.exact else 0.0

    def value(self, u, v):
        if u is None or v is None:
            return self._zero()
        if self.matrix is not None:
            if self.exact:
                return self.matrix[u][v]
            return float(self.matrix[u, v])
        if v in self.columns:
            return float(self.columns[v][u])
        if u in self.columns:
            # the operator is symmetric, so a column doubles as a row
            return float(self.columns[u][v])
        raise KeyError("green table has no column for either vertex")


def dirichlet_green(lat, exact=False):
    """Dense inverse of the negated Dirichlet Laplacian."""
    n = lat.n_vertices
    if exact:
        neg = [[-x for x in row] for row in laplacian_dirichlet(lat, exact=True)]
        return GreenTable(lat, matrix=inverse_exact(neg), exact=True)
    if n > DENSE_GREEN_LIMIT:
        raise ValueError(
            f"dense table for {n} vertices; use green_columns for patches this large"
        )
    neg = -laplacian_dirichlet(lat).astype(float)
    return GreenTable(lat, matrix=np.linalg.inv(neg))


def _lu_factor(lat):
    lu = _splu_cache.get(lat)
    if lu is None:
        # assembled sparsely; the dense builder would not fit for fine meshes
        n = lat.n_vertices
        nbr = lat.neighbor_ids
        rows, cols = np.nonzero(nbr >= 0)
        data = np.full(rows.shape, -1.0)
        diag = np.full(n, float(lat.coordination))
        neg = sparse.coo_matrix(
            (np.concatenate([data, diag]),
             (np.concatenate([rows, np.arange(n)]),
              np.concatenate([nbr[rows, cols], np.arange(n)]))),
            shape=(n, n),
        ).tocsc()
        lu = splu(neg)
        _splu_cache[lat] = lu
    return lu


def green_columns(lat, vertex_ids):
    """GreenTable holding just the requested columns, solved sparsely and
    cached per lattice, so repeated calls only pay for new vertices."""
    cache = _column_cache.get(lat)
    if cache is None:
        cache = {}
        _column_cache[lat] = cache
    missing = [v for v in set(vertex_ids) if v not in cache]
    if missing:
        lu = _lu_factor(lat)
        n = lat.n_vertices
        rhs = np.zeros((n, len(missing)))
        for j, v in enumerate(missing):
            rhs[v, j] = 1.0
        sol = lu.solve(rhs)
        for j, v in enumerate(missing):
            cache[v] = sol[:, j].copy()
    return GreenTable(lat, columns={v: cache[v] for v in vertex_ids})


def double_gradient(green, lat, e_f, e_g):
    """Transfer-matrix entry between two directed edges: the Green's function
    differenced at both tips against both bases, zero-extended outside."""
    fp = lat.edge_tip_id(e_f)
    fm = e_f.base
    gp = lat.edge_tip_id(e_g)
    gm = e_g.base
    return (
        green.value(fp, gp)
        - green.value(fp, gm)
        - green.value(fm, gp)
        + green.value(fm, gm)
    )


def transfer_matrix(green, lat, edges):
    """Matrix of double gradients over a list of directed edges.

    Returns nested Fractions in exact mode, an ndarray otherwise.
    """
    edges = list(edges)
    if green.exact:
        return [[double_gradient(green, lat, f, g) for g in edges] for f in edges]
    out = np.empty((len(edges), len(edges)))
    for i, f in enumerate(edges):
        for j, g in enumerate(edges):
            out[i, j] = double_gradient(green, lat, f, g)
    return out


def edges_needed_vertices(lat, edges):
    """Vertex ids a transfer matrix over these edges will query."""
    need = set()
    for e in edges:
        need.add(e.base)
        t = lat.edge_tip_id(e)
        if t is not None:
            need.add(t)
    return sorted(need)


def green_for_edges(lat, edges, exact=False):
    """Pick a backing store adequate for transfer_matrix over `edges`."""
    if exact:
        return dirichlet_green(lat, exact=True)
    if lat.n_vertices <= DENSE_GREEN_LIMIT:
        return dirichlet_green(lat)
    return green_columns(lat, edges_needed_vertices(lat, edges))


# ---------------------------------------------------------------------------
# Z^2 potential kernel, exact in the form r + s/pi with r, s rational


class _KernelTableZ2:
    """Values a(x, y) on the wedge 0 <= y <= x, grown layer by layer.

    Seeds a(0,0) = 0, a(1,0) = 1, a(1,1) = 4/pi; each new layer x+1 comes
    from harmonicity of `a` away from the origin plus the diagonal closed
    form a(n,n) = (4/pi) sum_{k<=n} 1/(2k-1), all in exact (rational,
    rational-over-pi) pairs.
    """

    def __init__(self):
        zero = Fraction(0)
        self.table = {
            (0, 0): (zero, zero),
            (1, 0): (Fraction(1), zero),
            (1, 1): (zero, Fraction(4)),
        }
        self.max_layer = 1

    def extend(self, upto):
        t = self.table

        def add(p, q):
            return (p[0] + q[0], p[1] + q[1])

        def scale(k, p):
            return (k * p[0], k * p[1])

        while self.max_layer < upto:
            x = self.max_layer
            t[(x + 1, 0)] = add(
                scale(4, t[(x, 0)]), scale(-1, add(t[(x - 1, 0)], scale(2, t[(x, 1)])))
            )
            for y in range(1, x):
                t[(x + 1, y)] = add(
                    scale(4, t[(x, y)]),
                    scale(-1, add(t[(x - 1, y)], add(t[(x, y + 1)], t[(x, y - 1)]))),
                )
            if x >= 1:
                t[(x + 1, x)] = add(scale(2, t[(x, x)]), scale(-1, t[(x, x - 1)]))
            t[(x + 1, x + 1)] = add(t[(x, x)], (Fraction(0), Fraction(4, 2 * x + 1)))
            self.max_layer = x + 1


_kernel_z2 = _KernelTableZ2()


def potential_kernel_z2_exact(offset):
    """Exact pair (r, s) with a(offset) = r + s/pi, |offset| bounded by the
    table range.  The kernel is normalized to a(0) = 0 and grows like
    (2/pi) log |x|; its lattice Laplacian is 4 at the origin and 0 elsewhere.
    """
    x, y = abs(offset[0]), abs(offset[1])
    if y > x:
        x, y = y, x
    if x > KERNEL_RANGE_Z2:
        raise ValueError(f"exact kernel table capped at range {KERNEL_RANGE_Z2}")
    _kernel_z2.extend(x)
    return _kernel_z2.table[(x, y)]


def potential_kernel_z2(offset):
    """Float kernel value; exact within the table range, asymptotic
    (2/pi) log|x| + (2 gamma + 3 log 2)/pi beyond it."""
    x, y = abs(offset[0]), abs(offset[1])
    if max(x, y) <= KERNEL_RANGE_Z2:
        r, s = potential_kernel_z2_exact((x, y))
        return float(r) + float(s) / math.pi
    rad2 = x * x + y * y
    return math.log(rad2) / math.pi + (2 * _EULER_GAMMA + 3 * math.log(2)) / math.pi


# ---------------------------------------------------------------------------
# Triangular potential kernel via its Fourier representation

_tri_cache = {}


def _tri_canonical(offset):
    a, b = offset
    best = None
    for _ in range(2):
        for _ in range(6):
            a, b = -b, a + b  # sixfold rotation in axial coordinates
            if best is None or (a, b) < best:
                best = (a, b)
        a, b = b, a  # reflection
    return best


def potential_kernel_triangular(offset):
    """a_T(offset) = mean over the Brillouin zone of (1 - cos k.offset)
    divided by the normalized symbol; a_T(0) = 0 and a_T = 1 on the six
    neighbors.  Values are cached per symmetry class of the offset."""
    key = _tri_canonical(offset)
    if key == (0, 0) or (key[0] == 0 and key[1] == 0):
        return 0.0
    if key in _tri_cache:
        return _tri_cache[key]
    a1, a2 = offset

    def integrand(t2, t1):
        denom = 1.0 - (math.cos(t1) + math.cos(t2) + math.cos(t1 - t2)) / 3.0
        if denom < 1e-14:
            return 0.0
        return (1.0 - math.cos(a1 * t1 + a2 * t2)) / denom

    val, _err = integrate.dblquad(
        integrand, -math.pi, math.pi, -math.pi, math.pi, epsabs=1e-12, epsrel=1e-12
    )
    val /= (2 * math.pi) ** 2
    _tri_cache[key] = val
    return val


# ---------------------------------------------------------------------------
# Z^d Green's function for d >= 3: Bessel integral plus a walk-series check

def green_zd(offset, dim):
    """G(offset) on Z^d, d >= 3, via the exponentially weighted Bessel
    product (1/2) integral of prod_i ive(|x_i|, s) ds.  ive carries the
    e^{-s} factor per coordinate, which is exactly the little-exponential
    needed for the d-fold product."""
    if dim < 3:
        raise ValueError("green_zd needs dim >= 3; use the potential kernel in d = 2")
    xs = [abs(int(c)) for c in offset]
    if len(xs) != dim:
        raise ValueError("offset length must equal dim")

    def f(s):
        out = 0.5
        for x in xs:
            out *= ive(x, s)
        return out

    val, _err = integrate.quad(f, 0.0, np.inf, limit=400, epsabs=1e-12, epsrel=1e-12)
    return float(val)


def green_zd_series(offset, dim, n_max=None):
    """Same value from the return-probability series with a fitted power
    tail.  Exact big-integer path counts are built by binomially convolving
    per-axis one-dimensional counts, so no floating underflow can occur; the
    truncated remainder is extrapolated as n^{-d/2} (a + b/n + c/n^2) and
    summed with Hurwitz zeta on the correct parity class.  Meant as an
    independent slow check of green_zd, not for production use."""
    if dim < 3:
        raise ValueError("series evaluator needs dim >= 3")
    xs = [abs(int(c)) for c in offset]
    if n_max is None:
        n_max = 600 if dim == 3 else 400

    def axis_counts(x):
        # c_m = number of m-step one-axis walks with displacement x
        out = [0] * (n_max + 1)
        for m in range(x, n_max + 1):
            if (m - x) % 2 == 0:
                out[m] = math.comb(m, (m + x) // 2)
        return out

    def egf_convolve(u, v):
        out = [0] * (n_max + 1)
        for n in range(n_max + 1):
            s = 0
            for m in range(n + 1):
                if u[m] and v[n - m]:
                    s += math.comb(n, m) * u[m] * v[n - m]
            out[n] = s
        return out

    walks = axis_counts(xs[0])
    for x in xs[1:]:
        walks = egf_convolve(walks, axis_counts(x))

    two_d = 2 * dim
    probs = [float(Fraction(w, two_d**n)) for n, w in enumerate(walks)]
    partial = sum(probs)

    parity = sum(xs) % 2
    support = [n for n in range(n_max + 1) if n % 2 == parity and n > 0]
    fit_ns = np.array(support[-40:], dtype=float)
    fit_ps = np.array([probs[int(n)] for n in fit_ns])
    s = dim / 2.0
    basis = np.stack([fit_ns**-s, fit_ns ** -(s + 1), fit_ns ** -(s + 2)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, fit_ps, rcond=None)

    # sum over n > n_max with n = 2k + parity
    k0 = (n_max + 1 - parity + 1) // 2
    tail = 0.0
    for j, c in enumerate(coef):
        sj = s + j
        tail += c * 2.0**-sj * zeta(sj, k0 + parity / 2.0)
    return (partial + tail) / two_d


# ---------------------------------------------------------------------------
# Infinite-volume transfer limit

def _infinite_green_difference(kind, dim, offset):
    """The function whose double gradient is the transfer limit: the true
    Green's function for d >= 3, minus kernel over coordination in d = 2.
    Finite-volume tables converge to the latter because the diverging part
    of the Green's function is constant and cancels in gradients."""
    if kind == "hypercubic" and dim >= 3:
        return green_zd(offset, dim)
    if kind == "hypercubic" and dim == 2:
        return -potential_kernel_z2(offset) / 4.0
    if kind == "triangular":
        return -potential_kernel_triangular(offset) / 6.0
    raise ValueError(f"no transfer limit for kind={kind!r} dim={dim}")


def transfer_limit(kind, dim, dir_f, dir_g, base_offset=None):
    """Limit of the transfer-matrix entry between edges in directions dir_f
    at the origin and dir_g at base_offset, as the patch exhausts the
    lattice.  Directions are indices into the lattice's direction table."""
    if kind == "triangular":
        from .lattice import TRIANGULAR_DIRECTIONS as dirs
    else:
        from .lattice import hypercubic_directions

        dirs = hypercubic_directions(dim)
    u = dirs[dir_f]
    w = dirs[dir_g]
    t = tuple(base_offset) if base_offset is not None else tuple(0 for _ in u)

    def g(v):
        return _infinite_green_difference(kind, dim, v)

    tpw = tuple(a + b for a, b in zip(t, w))
    tmu = tuple(a - b for a, b in zip(t, u))
    tpwmu = tuple(a + b - c for a, b, c in zip(t, w, u))
    return g(tpwmu) - g(tmu) - g(tpw) + g(t)


def transfer_limit_z2_exact(dir_f, dir_g, base_offset=(0, 0)):
    """Exact pair (r, s), value r + s/pi, of the d = 2 transfer limit."""
    from .lattice import hypercubic_directions

    dirs = hypercubic_directions(2)
    u = dirs[dir_f]
    w = dirs[dir_g]
    t = tuple(base_offset)

    def g(v):
        r, s = potential_kernel_z2_exact(v)
        return (-r / 4, -s / 4)

    vals = [
        g(tuple(a + b - c for a, b, c in zip(t, w, u))),
        g(tuple(a - b for a, b in zip(t, u))),
        g(tuple(a + b for a, b in zip(t, w))),
        g(t),
    ]
    r = vals[0][0] - vals[1][0] - vals[2][0] + vals[3][0]
    s = vals[0][1] - vals[1][1] - vals[2][1] + vals[3][1]
    return (r, s)


# ---------------------------------------------------------------------------
# Continuum: Green's function of the unit disk with Dirichlet boundary

def disk_green(x, y):
    """g(x, y) on the open unit disk via the image charge at x / |x|^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = float(np.hypot(*(y - x)))
    if r == 0.0:
        raise ValueError("diagonal of the disk Green's function diverges")
    nx = float(np.hypot(*x))
    if nx < 1e-14:
        return -math.log(float(np.hypot(*y))) / (2 * math.pi)
    star = x / (nx * nx)
    return (math.log(nx * float(np.hypot(*(y - star)))) - math.log(r)) / (2 * math.pi)


def disk_green_mixed(x, y):
    """2x2 matrix of mixed second partials d/dx_i d/dy_j of disk_green."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = y - x
    r2 = float(r @ r)
    if r2 == 0.0:
        raise ValueError("mixed partials diverge on the diagonal")
    out = np.empty((2, 2))
    nx2 = float(x @ x)
    if nx2 < 1e-28:
        # image contribution flattens to -identity at the disk center
        for i in range(2):
            for j in range(2):
                direct = (1.0 if i == j else 0.0) / r2 - 2.0 * r[i] * r[j] / (r2 * r2)
                out[i, j] = (direct - (1.0 if i == j else 0.0)) / (2 * math.pi)
        return out
    star = x / nx2
    s = y - star
    s2 = float(s @ s)
    jmat = np.array(
        [
            [
                (1.0 if i == k else 0.0) / nx2 - 2.0 * x[i] * x[k] / (nx2 * nx2)
                for k in range(2)
            ]
            for i in range(2)
        ]
    )
    for i in range(2):
        for j in range(2):
            direct = (1.0 if i == j else 0.0) / r2 - 2.0 * r[i] * r[j] / (r2 * r2)
            image = -jmat[i, j] / s2 + 2.0 * s[j] * float(s @ jmat[i]) / (s2 * s2)
            out[i, j] = (direct + image) / (2 * math.pi)
    return out


def disk_green_mixed_fd(x, y, h=1e-4):
    """Finite-difference oracle for disk_green_mixed with one Richardson
    refinement; keep h well above sqrt(eps) times the point separation."""

    def stencil(step):
        out = np.empty((2, 2))
        for i in range(2):
            for j in range(2):
                ei = np.array([step if i == 0 else 0.0, step if i == 1 else 0.0])
                ej = np.array([step if j == 0 else 0.0, step if j == 1 else 0.0])
                out[i, j] = (
                    disk_green(x + ei, y + ej)
                    - disk_green(x + ei, y - ej)
                    - disk_green(x - ei, y + ej)
                    + disk_green(x - ei, y - ej)
                ) / (4.0 * step * step)
        return out

    coarse = stencil(h)
    fine = stencil(h / 2.0)
    return (4.0 * fine - coarse) / 3.0
