"""Finite lattice patches with a wired boundary.

A patch is a finite set of vertices from an infinite lattice (hypercubic in
dimension 2, 3, 4, or the triangular lattice in axial coordinates), together
with the ghost vertex that absorbs every edge leaving the set.  Vertices are
indexed 0..n-1 in a canonical order so that all matrices downstream are
reproducible; the ghost, where it appears, is always index n.

Directed edges are (base_id, direction_index) pairs.  Direction indices are
arranged so that reversal is `(i + c//2) % c` with c the coordination number;
this single convention feeds the transfer matrices, the constants, and the
surgery bookkeeping, so it must never change.
"""

from __future__ import annotations

import itertools
from typing import NamedTuple

import numpy as np

TRIANGULAR_DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def hypercubic_directions(d):
    """2d unit steps: +e_1..+e_d then -e_1..-e_d, so reversal adds d mod 2d."""
    out = []
    for i in range(d):
        out.append(tuple(1 if j == i else 0 for j in range(d)))
    for i in range(d):
        out.append(tuple(-1 if j == i else 0 for j in range(d)))
    return tuple(out)


class Edge(NamedTuple):
    base: int
    direction: int


class FiniteLattice:
    """Immutable vertex patch plus adjacency into itself and the ghost."""

    def __init__(self, kind, dim, coords):
        if kind == "hypercubic":
            directions = hypercubic_directions(dim)
        elif kind == "triangular":
            if dim != 2:
                raise ValueError("triangular patches live in two axial coordinates")
            directions = TRIANGULAR_DIRECTIONS
        else:
            raise ValueError(f"unknown lattice kind {kind!r}")
        coords = [tuple(c) for c in coords]
        if len(set(coords)) != len(coords):
            raise ValueError("duplicate vertex coordinates")
        self.kind = kind
        self.dim = dim
        self.coords = tuple(coords)
        self.index = {c: i for i, c in enumerate(coords)}
        self.directions = directions
        self.coordination = len(directions)
        n = len(coords)
        # neighbor_ids[v][k] = vertex id one step along direction k, -1 if the
        # step leaves the patch (those edges all land on the ghost)
        nbr = np.full((n, self.coordination), -1, dtype=np.int64)
        for i, c in enumerate(coords):
            for k, step in enumerate(directions):
                t = tuple(a + b for a, b in zip(c, step))
                nbr[i, k] = self.index.get(t, -1)
        nbr.setflags(write=False)
        self.neighbor_ids = nbr
        self.ghost_multiplicity = tuple(int(m) for m in (nbr < 0).sum(axis=1))
        self.interior_ids = tuple(i for i in range(n) if self.ghost_multiplicity[i] == 0)

    @property
    def n_vertices(self):
        return len(self.coords)

    def __repr__(self):
        return f"FiniteLattice({self.kind}, dim={self.dim}, n={self.n_vertices})"

    def vertex_id(self, coord):
        coord = tuple(coord)
        if coord not in self.index:
            raise KeyError(f"{coord} is not a vertex of this patch")
        return self.index[coord]

    def edge_tip_coord(self, e):
        base = self.coords[e.base]
        step = self.directions[e.direction]
        return tuple(a + b for a, b in zip(base, step))

    def edge_tip_id(self, e):
        """Vertex id at the tip, or None when the edge exits into the ghost."""
        t = int(self.neighbor_ids[e.base, e.direction])
        return None if t < 0 else t

    def opposite_direction(self, k):
        return (k + self.coordination // 2) % self.coordination

    def edge_reverse(self, e):
        """The same unoriented edge traversed backwards; only defined when the
        tip is inside the patch."""
        tip = self.edge_tip_id(e)
        if tip is None:
            raise ValueError("cannot reverse an edge into the ghost")
        return Edge(tip, self.opposite_direction(e.direction))

    def edge_star(self, v):
        """All directed edges based at vertex id v, in direction order."""
        return tuple(Edge(v, k) for k in range(self.coordination))

    def edge_set(self, vertex_ids):
        """E(V): edges based at the given vertices, vertex-major order."""
        return tuple(Edge(v, k) for v in vertex_ids for k in range(self.coordination))

    def unoriented_key(self, e):
        base = self.coords[e.base]
        tip = self.edge_tip_coord(e)
        return (min(base, tip), max(base, tip))


def build_box(dim, sides):
    """Hypercubic box with sides (s_1, ..., s_dim), vertices in product order
    (last coordinate varies fastest)."""
    sides = tuple(int(s) for s in sides)
    if len(sides) != dim or any(s < 1 for s in sides):
        raise ValueError("each side must be a positive integer")
    coords = list(itertools.product(*(range(s) for s in sides)))
    return FiniteLattice("hypercubic", dim, coords)


def hex_distance(coord):
    a, b = coord
    return (abs(a) + abs(b) + abs(a + b)) // 2


def build_triangular_patch(radius):
    """Triangular-lattice ball of the given graph radius around the origin,
    in axial coordinates, vertices sorted lexicographically."""
    radius = int(radius)
    if radius < 0:
        raise ValueError("radius must be >= 0")
    coords = sorted(
        (a, b)
        for a in range(-radius, radius + 1)
        for b in range(-radius, radius + 1)
        if hex_distance((a, b)) <= radius
    )
    return FiniteLattice("triangular", 2, coords)


def build_from_coords(kind, dim, coords):
    """Patch from an arbitrary vertex set (used for carved shapes like disks)."""
    return FiniteLattice(kind, dim, sorted(tuple(c) for c in coords))


def triangular_embedding(coord):
    """Euclidean position of an axial coordinate; unit edge length."""
    a, b = coord
    return (a + b / 2.0, b * np.sqrt(3.0) / 2.0)


def laplacian_dirichlet(lattice, exact=False):
    """Graph Laplacian restricted to the patch (Dirichlet at the ghost).

    Diagonal is the full coordination number, so mass lost over the boundary
    stays on the diagonal.  Returns a numpy int64 array, or nested lists of
    ints when exact=True (callers wrap in Fractions as needed).
    """
    n = lattice.n_vertices
    c = lattice.coordination
    lap = np.zeros((n, n), dtype=np.int64)
    for v in range(n):
        lap[v, v] = -c
        for k in range(c):
            t = lattice.neighbor_ids[v, k]
            if t >= 0:
                lap[v, t] += 1
    if exact:
        return [[int(x) for x in row] for row in lap]
    return lap


def laplacian_wired(lattice, exact=False):
    """Laplacian of the patch plus ghost, ghost last.  Row sums vanish; the
    ghost diagonal is minus the total boundary multiplicity."""
    n = lattice.n_vertices
    lap = np.zeros((n + 1, n + 1), dtype=np.int64)
    lap[:n, :n] = laplacian_dirichlet(lattice)
    for v in range(n):
        m = lattice.ghost_multiplicity[v]
        if m:
            lap[v, n] = m
            lap[n, v] = m
    lap[n, n] = -sum(lattice.ghost_multiplicity)
    if exact:
        return [[int(x) for x in row] for row in lap]
    return lap


def is_good_set(lattice, vertex_ids):
    """True when the vertices are pairwise distinct, pairwise non-adjacent,
    and their complement stays connected to the boundary.

    The second condition is checked by flooding the complement from every
    vertex with positive ghost multiplicity; any unreached complement vertex
    means removing V would strand a region away from the ghost.
    """
    vs = list(vertex_ids)
    vset = set(vs)
    if len(vset) != len(vs):
        return False
    for v in vs:
        for k in range(lattice.coordination):
            t = lattice.neighbor_ids[v, k]
            if t >= 0 and t in vset:
                return False
    rest = set(range(lattice.n_vertices)) - vset
    if not rest:
        return True
    frontier = [u for u in rest if lattice.ghost_multiplicity[u] > 0]
    seen = set(frontier)
    while frontier:
        u = frontier.pop()
        for k in range(lattice.coordination):
            t = int(lattice.neighbor_ids[u, k])
            if t >= 0 and t in rest and t not in seen:
                seen.add(t)
                frontier.append(t)
    return seen == rest
