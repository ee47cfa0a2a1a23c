"""Monte Carlo against exact determinant predictions.

The addition-stabilization chain is compared per vertex to the exact
height-one probabilities; the spanning-tree sampler is compared on the star
edges of the central vertex and on all per-vertex degree means.  Everything
is seeded, so reruns are byte-identical.
"""

import argparse

import numpy as np

from fgfflab.greenfn import dirichlet_green
from fgfflab.lattice import build_box
from fgfflab.moments import degree_moment, height_one_prob, spanning_tree_edge_prob
from fgfflab.samplers import chain_sample, wilson_sample


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--box", default="5x5")
    ap.add_argument("--steps", type=int, default=2_000_000)
    ap.add_argument("--trees", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2)
    args = ap.parse_args()

    sides = tuple(int(s) for s in args.box.lower().split("x"))
    lat = build_box(2, sides)
    green = dirichlet_green(lat)

    res = chain_sample(lat, args.steps, seed=args.seed)
    print(f"chain: {args.steps} steps on {args.box}, seed {args.seed}")
    print(f"{'vertex':<10}{'frequency':<16}{'exact':<16}{'z'}")
    worst = 0.0
    for v in range(lat.n_vertices):
        exact = height_one_prob(lat, [v], green=green)
        z = (res.freq[v] - exact) / res.stderr[v]
        worst = max(worst, abs(z))
        print(f"{str(lat.coords[v]):<10}{res.freq[v]:<16.6f}{exact:<16.6f}{z:+.2f}")
    print(f"worst |z| = {worst:.2f}\n")

    mean = [sum(cs) / lat.n_vertices for cs in zip(*lat.coords)]
    center = min(range(lat.n_vertices),
                 key=lambda v: sum((c - m) ** 2 for c, m in zip(lat.coords[v], mean)))
    edges = [e for e in lat.edge_star(center) if lat.edge_tip_id(e) is not None]
    wres = wilson_sample(lat, args.trees, seed=args.seed, edges=edges)
    print(f"wilson: {args.trees} trees on {args.box}, seed {args.seed}, "
          f"star of {lat.coords[center]}")
    print(f"{'edge':<12}{'frequency':<16}{'exact':<16}{'z'}")
    for j, e in enumerate(edges):
        exact = spanning_tree_edge_prob(lat, [e], green=green)
        z = (wres.edge_freq[j] - exact) / wres.edge_stderr[j]
        print(f"{e.base}:{e.direction:<10}{wres.edge_freq[j]:<16.6f}"
              f"{exact:<16.6f}{z:+.2f}")
    exact_deg = np.array(
        [lat.coordination * degree_moment(lat, [v], green=green)
         for v in range(lat.n_vertices)]
    )
    z_deg = np.abs(wres.degree_mean - exact_deg) / wres.degree_stderr
    print(f"degree means: worst |z| = {z_deg.max():.2f} over "
          f"{lat.n_vertices} vertices")


if __name__ == "__main__":
    main()
