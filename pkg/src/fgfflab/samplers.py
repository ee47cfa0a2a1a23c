"""Sandpile and spanning-tree samplers, plus exact small-scale enumeration.

Two stochastic engines, both compiled with numba and seeded through numpy's
legacy generator so a (seed, lattice, steps) triple is fully reproducible:

  * a single-site-addition chain on recurrent sandpile configurations,
    stabilized by toppling, recording per-vertex height-one indicators with
    batch-mean error bars;
  * Wilson's algorithm rooted at the ghost, recording directed-edge and
    degree statistics of the wired uniform spanning tree.

The pure-Python pieces are the ground truth for tiny systems: stabilization
with an arbitrary processing schedule (the result must not depend on it),
the burning test for recurrence, and full enumeration of recurrent
configurations, whose count must match the spanning-tree determinant.

Heights are stable at 1..c (c the coordination number) and topple above c;
grains sent over the boundary vanish.
"""

from __future__ import annotations

import itertools
import weakref
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

ENUMERATION_CAP = 2**22


# ---------------------------------------------------------------------------
# Pure-Python reference pieces

def stabilize(lat, heights, schedule_seed=None):
    """Topple until stable; returns (new heights tuple, total topples).

    The processing order is shuffled when schedule_seed is given, which must
    not change the result; a test leans on that.
    """
    c = lat.coordination
    h = list(heights)
    if len(h) != lat.n_vertices:
        raise ValueError("height vector length mismatch")
    rng = np.random.default_rng(schedule_seed) if schedule_seed is not None else None
    topples = 0
    active = [v for v in range(lat.n_vertices) if h[v] > c]
    while active:
        if rng is not None:
            rng.shuffle(active)
        nxt = set()
        for v in active:
            while h[v] > c:
                h[v] -= c
                topples += 1
                for k in range(c):
                    t = int(lat.neighbor_ids[v, k])
                    if t >= 0:
                        h[t] += 1
                        if h[t] > c:
                            nxt.add(t)
            if h[v] > c:
                nxt.add(v)
        active = list(nxt)
    return tuple(h), topples


def is_recurrent(lat, heights):
    """Burning test: fire spreads from the ghost; a vertex burns once its
    height exceeds its count of unburnt interior neighbors.  Recurrent
    means everything burns."""
    c = lat.coordination
    n = lat.n_vertices
    unburnt_nbrs = [0] * n
    for v in range(n):
        unburnt_nbrs[v] = sum(1 for k in range(c) if lat.neighbor_ids[v, k] >= 0)
    burnt = [False] * n
    frontier = [v for v in range(n) if heights[v] > unburnt_nbrs[v]]
    for v in frontier:
        burnt[v] = True
    count = len(frontier)
    while frontier:
        nxt = []
        for v in frontier:
            for k in range(c):
                t = int(lat.neighbor_ids[v, k])
                if t >= 0 and not burnt[t]:
                    unburnt_nbrs[t] -= 1
                    if heights[t] > unburnt_nbrs[t]:
                        burnt[t] = True
                        nxt.append(t)
        frontier = nxt
        count += len(nxt)
    return count == n


def enumerate_recurrent(lat):
    """Yield every recurrent stable configuration as a tuple of heights."""
    c = lat.coordination
    n = lat.n_vertices
    if c**n > ENUMERATION_CAP:
        raise ValueError(f"state space {c}^{n} exceeds the enumeration cap")
    for h in itertools.product(range(1, c + 1), repeat=n):
        if is_recurrent(lat, h):
            yield h


_recurrent_cache = weakref.WeakKeyDictionary()


def recurrent_heights_array(lat):
    """All recurrent stable configurations as a (count, n) uint8 array.

    The burning test runs vectorized over the whole stable state space at
    once (at most n rounds), so repeated moment queries on one lattice pay
    for the enumeration a single time.  Cached per lattice.
    """
    hit = _recurrent_cache.get(lat)
    if hit is not None:
        return hit
    c = lat.coordination
    n = lat.n_vertices
    if c**n > ENUMERATION_CAP:
        raise ValueError(f"state space {c}^{n} exceeds the enumeration cap")
    grids = np.meshgrid(*([np.arange(1, c + 1, dtype=np.uint8)] * n), indexing="ij")
    hts = np.stack([g.ravel() for g in grids], axis=1)
    interior = [[int(u) for u in lat.neighbor_ids[v] if u >= 0] for v in range(n)]
    burnt = np.zeros(hts.shape, dtype=bool)
    while True:
        deg = np.zeros(hts.shape, dtype=np.uint8)
        for v in range(n):
            for u in interior[v]:
                deg[:, v] += ~burnt[:, u]
        new = ~burnt & (hts > deg)
        if not new.any():
            break
        burnt |= new
    out = hts[burnt.all(axis=1)]
    _recurrent_cache[lat] = out
    return out


def recurrent_indicator_moment(lat, vertex_ids, height=1):
    """Exact P(h(v) = height for all v in V) under the uniform recurrent
    measure, by enumeration.  Returns a Fraction."""
    vs = list(vertex_ids)
    hts = recurrent_heights_array(lat)
    if hts.shape[0] == 0:
        raise RuntimeError("no recurrent configurations found")
    hits = (hts[:, vs] == height).all(axis=1).sum()
    return Fraction(int(hits), int(hts.shape[0]))


def recurrent_degree_moment(lat, vertex_ids):
    """Exact E[prod_v deg(v)/c] over the wired uniform spanning tree, by
    Kirchhoff-style enumeration of parent maps on tiny patches.

    Enumerates all functions assigning each vertex an outgoing direction and
    keeps the cycle-free ones; each such map is a spanning tree of the wired
    graph with ghost-parallel edges counted separately, matching the uniform
    measure exactly.
    """
    vs = list(vertex_ids)
    c = lat.coordination
    n = lat.n_vertices
    if c**n > ENUMERATION_CAP:
        raise ValueError(f"parent-map space {c}^{n} exceeds the enumeration cap")
    total = 0
    weighted = 0
    for dirs in itertools.product(range(c), repeat=n):
        parent = [int(lat.neighbor_ids[v, dirs[v]]) for v in range(n)]
        state = [0] * n  # 0 unseen, 1 in progress, 2 done
        ok = True
        for start in range(n):
            v = start
            path = []
            while v >= 0 and state[v] == 0:
                state[v] = 1
                path.append(v)
                v = parent[v]
            if v >= 0 and state[v] == 1:
                ok = False
                break
            for u in path:
                state[u] = 2
        if not ok:
            continue
        total += 1
        deg = [1] * n  # parent edge
        for v in range(n):
            if parent[v] >= 0:
                deg[parent[v]] += 1
        prod = 1
        for v in vs:
            prod *= deg[v]
        weighted += prod
    return Fraction(weighted, total * c ** len(vs))


# ---------------------------------------------------------------------------
# Compiled kernels

@njit(cache=True)
def _chain_kernel(nbr, c, steps, burn_in, seed, batches, counts, heights):
    np.random.seed(seed)
    n = heights.shape[0]
    cap = n + 1
    queue = np.empty(cap, dtype=np.int64)
    in_q = np.zeros(n, dtype=np.uint8)
    kept = steps - burn_in
    for step in range(steps):
        v = np.random.randint(0, n)
        heights[v] += 1
        if heights[v] > c:
            # ring-buffer toppling; the in-queue flag caps occupancy at n
            head = 0
            tail = 1
            size = 1
            queue[0] = v
            in_q[v] = 1
            while size > 0:
                u = queue[head]
                head = (head + 1) % cap
                size -= 1
                in_q[u] = 0
                while heights[u] > c:
                    heights[u] -= c
                    for k in range(c):
                        t = nbr[u, k]
                        if t >= 0:
                            heights[t] += 1
                            if heights[t] > c and in_q[t] == 0:
                                queue[tail] = t
                                tail = (tail + 1) % cap
                                size += 1
                                in_q[t] = 1
        if step >= burn_in:
            b = (step - burn_in) * batches // kept
            for t in range(n):
                if heights[t] == 1:
                    counts[b, t] += 1


@njit(cache=True)
def _wilson_kernel(nbr, c, n_samples, seed, parent_dir, edge_base, edge_dir,
                   edge_counts, degree_counts):
    np.random.seed(seed)
    n = nbr.shape[0]
    in_tree = np.empty(n, dtype=np.uint8)
    opposite = c // 2
    for s in range(n_samples):
        for v in range(n):
            in_tree[v] = 0
            parent_dir[v] = -1
        for start in range(n):
            if in_tree[start] == 1:
                continue
            u = start
            while u >= 0 and in_tree[u] == 0:
                k = np.random.randint(0, c)
                parent_dir[u] = k
                u = nbr[u, k]
            u = start
            while u >= 0 and in_tree[u] == 0:
                in_tree[u] = 1
                u = nbr[u, parent_dir[u]]
        for j in range(edge_base.shape[0]):
            v = edge_base[j]
            k = edge_dir[j]
            hit = parent_dir[v] == k
            if not hit:
                t = nbr[v, k]
                if t >= 0 and parent_dir[t] == (k + opposite) % c:
                    hit = True
            if hit:
                edge_counts[j] += 1
        for v in range(n):
            degree_counts[v] += 1  # parent edge
        for v in range(n):
            t = nbr[v, parent_dir[v]]
            if t >= 0:
                degree_counts[t] += 1


# ---------------------------------------------------------------------------
# Friendly wrappers

@dataclass
class ChainResult:
    steps: int
    burn_in: int
    seed: int
    freq: np.ndarray  # per-vertex height-one frequency
    stderr: np.ndarray  # batch-mean error bars
    batch_counts: np.ndarray


@dataclass
class WilsonResult:
    n_samples: int
    seed: int
    edges: tuple
    edge_freq: np.ndarray
    edge_stderr: np.ndarray
    degree_mean: np.ndarray
    degree_stderr: np.ndarray


def chain_sample(lat, steps, seed, burn_in=None, batches=32):
    """Run the addition-stabilization chain from the all-c configuration and
    return per-vertex height-one frequencies with batch-mean error bars."""
    steps = int(steps)
    if burn_in is None:
        burn_in = steps // 10
    if not (0 <= burn_in < steps):
        raise ValueError("burn_in must be within the step budget")
    c = lat.coordination
    n = lat.n_vertices
    heights = np.full(n, c, dtype=np.int64)
    counts = np.zeros((batches, n), dtype=np.int64)
    nbr = np.ascontiguousarray(lat.neighbor_ids)
    _chain_kernel(nbr, c, steps, burn_in, seed, batches, counts, heights)
    kept = steps - burn_in
    sizes = np.bincount((np.arange(kept) * batches) // kept, minlength=batches)
    per_batch = counts / sizes[:, None]
    freq = per_batch.mean(axis=0)
    stderr = per_batch.std(axis=0, ddof=1) / np.sqrt(batches)
    return ChainResult(steps=steps, burn_in=burn_in, seed=seed, freq=freq,
                       stderr=stderr, batch_counts=counts)


def wilson_sample(lat, n_samples, seed, edges=()):
    """Sample wired uniform spanning trees; report frequencies for the given
    directed edges (membership of their unoriented support) and per-vertex
    degree means.  Binomial error bars for edges, normal for degrees."""
    edges = tuple(edges)
    c = lat.coordination
    n = lat.n_vertices
    parent_dir = np.full(n, -1, dtype=np.int64)
    edge_base = np.array([e.base for e in edges], dtype=np.int64)
    edge_dir = np.array([e.direction for e in edges], dtype=np.int64)
    if edge_base.size == 0:
        edge_base = np.zeros(0, dtype=np.int64)
        edge_dir = np.zeros(0, dtype=np.int64)
    edge_counts = np.zeros(len(edges), dtype=np.int64)
    degree_counts = np.zeros(n, dtype=np.int64)
    nbr = np.ascontiguousarray(lat.neighbor_ids)
    _wilson_kernel(nbr, c, int(n_samples), seed, parent_dir, edge_base, edge_dir,
                   edge_counts, degree_counts)
    p = edge_counts / float(n_samples)
    edge_stderr = np.sqrt(np.maximum(p * (1 - p), 1e-300) / n_samples)
    deg_mean = degree_counts / float(n_samples)
    # degrees live in 1..c; a crude variance bound keeps the z-scores honest
    deg_stderr = np.full(n, c / (2.0 * np.sqrt(n_samples)))
    return WilsonResult(n_samples=int(n_samples), seed=seed, edges=edges,
                        edge_freq=p, edge_stderr=edge_stderr,
                        degree_mean=deg_mean, degree_stderr=deg_stderr)
