"""Set partitions, cyclic permutations, Stirling numbers, and the analysis of
permutations acting on families of directed edges grouped by their base
vertex.

The cumulant machinery downstream needs three things from a permutation tau
of a finite edge set: the multigraph it induces on base vertices (one edge
per mapping event f -> tau(f) whose endpoints have different owners), whether
that multigraph is connected, and whether tau is "bare" (connected with every
vertex meeting exactly one incoming and one outgoing crossing event).  Bare
permutations decompose into a cyclic vertex permutation plus per-vertex entry
edges and a local sign, and admit a local surgery that peels one vertex off
while tracking signs.  Everything here is exact integer combinatorics; no
lattice data enters except through an opaque `owner` map and an optional
direction index per edge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

MAX_PARTITION_ITEMS = 12
MAX_STIRLING_N = 20


def partitions(items):
    """Yield every set partition of `items` as a tuple of tuples.

    Enumeration follows restricted growth strings, so blocks come out in
    order of first appearance and the stream is deterministic.  Capped at
    12 items; Bell(12) = 4213597 is the most any caller should want.
    """
    items = list(items)
    n = len(items)
    if n > MAX_PARTITION_ITEMS:
        raise ValueError(f"partition enumeration capped at {MAX_PARTITION_ITEMS} items")
    if n == 0:
        yield ()
        return

    def rec(i, assign, nblocks):
        if i == n:
            blocks = [[] for _ in range(nblocks)]
            for j, b in enumerate(assign):
                blocks[b].append(items[j])
            yield tuple(tuple(b) for b in blocks)
            return
        for b in range(nblocks):
            assign.append(b)
            yield from rec(i + 1, assign, nblocks)
            assign.pop()
        assign.append(nblocks)
        yield from rec(i + 1, assign, nblocks + 1)
        assign.pop()

    yield from rec(0, [], 0)


def partition_alternating_sum(block_fn, items):
    """Sum over set partitions of (-1)^(#blocks-1) (#blocks-1)! prod block_fn(B).

    This weight is its own inverse's companion: applied to moments it yields
    the joint cumulant, applied to full (disconnected) permutation sums it
    extracts the connected part.  block_fn receives each block as a tuple.
    """
    total = None
    for part in partitions(items):
        k = len(part)
        w = (-1) ** (k - 1) * _factorial(k - 1)
        prod = w
        for block in part:
            prod = prod * block_fn(block)
        total = prod if total is None else total + prod
    return total


def _factorial(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def cyclic_permutations(items):
    """Yield every full-cycle permutation of `items` as a dict.

    A single item or the empty set yields nothing: there is no cycle of
    length < 2 under this convention, and callers treat n = 1 separately.
    """
    items = list(items)
    if len(items) < 2:
        return
    first, rest = items[0], items[1:]
    for perm in itertools.permutations(rest):
        order = (first,) + perm
        yield {order[i]: order[(i + 1) % len(order)] for i in range(len(order))}


def stirling2(n, k):
    """Stirling number of the second kind S(n, k), exact, cached."""
    if not (0 <= k <= n <= MAX_STIRLING_N):
        raise ValueError(f"stirling2 requires 0 <= k <= n <= {MAX_STIRLING_N}")
    return _stirling2_cached(n, k)


def _stirling2_cached(n, k, _cache={(0, 0): 1}):
    if k == 0:
        return 1 if n == 0 else 0
    if k > n:
        return 0
    key = (n, k)
    if key not in _cache:
        _cache[key] = k * _stirling2_cached(n - 1, k) + _stirling2_cached(n - 1, k - 1)
    return _cache[key]


def stirling_alternating_sum(m):
    """sum_{k=1}^{m} S(m, k) (k-1)! (-1)^(k-1).

    Equals 1 for m = 1 and 0 for every m >= 2; this collapse is what kills
    all non-bare connected permutations in the cumulant expansion.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    return sum(stirling2(m, k) * _factorial(k - 1) * (-1) ** (k - 1) for k in range(1, m + 1))


def permutation_sign(tau):
    """Sign of a permutation given as a dict (or as a tuple of images of 0..n-1)."""
    if isinstance(tau, dict):
        mapping = tau
        keys = list(tau.keys())
    else:
        mapping = {i: v for i, v in enumerate(tau)}
        keys = list(range(len(tau)))
    seen = set()
    sign = 1
    for start in keys:
        if start in seen:
            continue
        length = 0
        x = start
        while x not in seen:
            seen.add(x)
            x = mapping[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


@dataclass
class PermutationProfile:
    """What a permutation of edges looks like at the vertex level."""

    vertices: tuple
    crossing_events: tuple  # (owner(f), owner(tau(f))) per event, in domain order
    connected: bool
    bare: bool
    degrees: dict = field(repr=False)


def classify_permutation(tau, owner):
    """Classify tau: dict edge -> edge, owner: dict edge -> vertex.

    The induced multigraph has vertex set owner.values() and one edge per
    mapping event f -> tau(f) with owner(f) != owner(tau(f)).  Connectivity
    is over that multigraph; an ownerless vertex never occurs because every
    vertex owns at least one edge of the domain.  Bare means connected with
    the crossing-event count equal to the vertex count, which for a
    permutation forces exactly one exit and one entry event per vertex.
    A single vertex is connected but never bare here.
    """
    verts = sorted(set(owner.values()))
    cross = []
    for f in tau:
        g = tau[f]
        if owner[f] != owner[g]:
            cross.append((owner[f], owner[g]))

    parent = {v: v for v in verts}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in cross:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    connected = len({find(v) for v in verts}) == 1

    degrees = {v: 0 for v in verts}
    for a, b in cross:
        degrees[a] += 1
        degrees[b] += 1

    bare = connected and len(verts) >= 2 and len(cross) == len(verts)
    if bare:
        # crossing count |V| with even degrees and connectivity means every
        # degree is exactly 2; assert rather than trust the counting argument
        assert all(d == 2 for d in degrees.values())
    return PermutationProfile(
        vertices=tuple(verts),
        crossing_events=tuple(cross),
        connected=connected,
        bare=bare,
        degrees=degrees,
    )


def permutations_of(edges):
    """All bijections of `edges` to itself as dicts, lexicographic in image order."""
    edges = list(edges)
    for images in itertools.permutations(edges):
        yield dict(zip(edges, images))


def connected_permutations(edges, owner):
    """Yield (tau, sign) over permutations whose induced multigraph is connected."""
    for tau in permutations_of(edges):
        if classify_permutation(tau, owner).connected:
            yield tau, permutation_sign(tau)


@dataclass
class BareDecomposition:
    """Cyclic vertex permutation plus per-vertex local data of a bare tau.

    entry[v] is the unique edge of v whose preimage lives elsewhere, exit[v]
    the unique edge of v whose image lives elsewhere.  sigma sends v to the
    owner of tau(exit[v]).  For hypercubic-type edge families the exit must
    be the entry or its reversal and gamma[v] is +1 or -1 accordingly; for
    six-direction families alpha[v] records the rotation index from entry to
    exit direction.  admissible is False when some exit is not parallel to
    its entry (hypercubic case only).
    """

    sigma: dict
    entry: dict
    exit: dict
    gamma: dict
    alpha: dict
    admissible: bool


def decompose_bare(tau, owner, direction_of=None, num_directions=None):
    """Extract (sigma, entry, exit, local data) from a bare permutation.

    direction_of maps an edge to its direction index; edges f and g based at
    the same vertex are reversals of each other when their indices differ by
    num_directions // 2 mod num_directions.  When direction data is omitted
    only sigma/entry/exit are filled in.  Raises on a non-bare tau.
    """
    prof = classify_permutation(tau, owner)
    if not prof.bare:
        raise ValueError("decompose_bare needs a bare permutation")
    by_vertex = {}
    for f in tau:
        by_vertex.setdefault(owner[f], []).append(f)
    inv = {g: f for f, g in tau.items()}

    sigma, entry, exit_, gamma, alpha = {}, {}, {}, {}, {}
    admissible = True
    for v, fam in by_vertex.items():
        entries = [f for f in fam if owner[inv[f]] != v]
        exits = [f for f in fam if owner[tau[f]] != v]
        assert len(entries) == 1 and len(exits) == 1
        entry[v] = entries[0]
        exit_[v] = exits[0]
        sigma[v] = owner[tau[exits[0]]]
        if direction_of is not None:
            de = direction_of(entries[0])
            dx = direction_of(exits[0])
            half = num_directions // 2
            diff = (dx - de) % num_directions
            alpha[v] = diff
            if diff == 0:
                gamma[v] = 1
            elif diff == half:
                gamma[v] = -1
            else:
                gamma[v] = None
                admissible = False
    return BareDecomposition(
        sigma=sigma, entry=entry, exit=exit_, gamma=gamma, alpha=alpha, admissible=admissible
    )


def local_loop(tau, owner, v, entry_v, gamma_v):
    """The permutation of v's edges minus its entry, induced by a bare tau.

    For gamma = +1 the exit equals the entry and tau already permutes the
    remaining family; for gamma = -1 the exit is the reversed entry and the
    map is patched there to close up: the reversed entry is sent to the image
    of the entry.  Requires the reversal of entry_v when gamma_v = -1, which
    the caller identifies by passing it via tau's domain (found here as the
    unique exit).
    """
    fam = [f for f in owner if owner[f] == v]
    inv_dom = set(fam)
    exits = [f for f in fam if owner[tau[f]] != v]
    assert len(exits) == 1
    exit_v = exits[0]
    dom = [f for f in fam if f != entry_v]
    omega = {}
    for f in dom:
        if gamma_v == -1 and f == exit_v:
            omega[f] = tau[entry_v]
        else:
            omega[f] = tau[f]
    assert set(omega.values()) == set(dom), "local loop must permute the reduced family"
    assert inv_dom.issuperset(omega.values())
    return omega


def peel_vertex(tau, owner, v, entry_v, sigma_v_entry):
    """Remove vertex v's edges from a bare tau, keeping one tracking point.

    The result acts on (all edges not owned by v) plus entry_v, sending
    entry_v straight to the entry edge of sigma(v) and acting as tau
    elsewhere.  Together with local_loop this realizes the one-vertex
    surgery whose sign bookkeeping the tests check exhaustively.
    """
    out = {}
    for f in tau:
        if owner[f] == v:
            continue
        out[f] = tau[f]
    out[entry_v] = sigma_v_entry
    # entries into v from elsewhere must be redirected through the surgery:
    # the unique edge mapping into entry_v keeps its image (entry_v stays in
    # the domain); every other edge owned elsewhere that mapped into v's
    # family cannot exist for a bare tau.
    for f, g in tau.items():
        if owner[f] != v and owner[g] == v and g != entry_v:
            raise ValueError("permutation is not bare at the peeled vertex")
    return out


def moment_cumulant_sum(moment_fn, items):
    """Joint cumulant from joint moments via the partition alternating sum."""
    return partition_alternating_sum(lambda block: moment_fn(block), items)


def frac(x):
    """Coerce to Fraction; tiny convenience used by exact-mode callers."""
    return x if isinstance(x, Fraction) else Fraction(x)
