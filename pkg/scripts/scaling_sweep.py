"""Desk-scale scaling study on the unit disk.

Runs the mesh-refinement sweep for each field at a fixed two-point
configuration, then the cross-configuration normalization audit at the
finest mesh.  The sweep's relative error measures the full discretization
error against the nominal-position target; the audit compares against
snapped-position targets so only the normalization constant is on trial.
"""

import argparse

from fgfflab.scaling import convergence_sweep, normalization_audit, parse_mesh

DEFAULT_CONFIGS = [
    [(-0.3, 0.0), (0.3, 0.0)],
    [(-0.2121, -0.2121), (0.2121, 0.2121)],
    [(-0.15, 0.26), (0.15, -0.26)],
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", default="1/16,1/32,1/64",
                    help="comma list of meshes, coarse to fine")
    ap.add_argument("--fields", default="neg_degree,degree,height1")
    args = ap.parse_args()

    meshes = [parse_mesh(tok) for tok in args.eps.split(",")]
    points = DEFAULT_CONFIGS[0]

    for field in args.fields.split(","):
        print(f"== {field} at {points} ==")
        rows = convergence_sweep(field, points, meshes)
        print(f"{'eps':<12}{'rescaled':<26}{'target':<26}{'rel error'}")
        for r in rows:
            print(f"{r.eps:<12.6f}{r.lattice_value:<26.12e}"
                  f"{r.target:<26.12e}{r.rel_error:.4f}")

        ratios = normalization_audit(field, DEFAULT_CONFIGS, min(meshes))
        spread = max(ratios) / min(ratios) - 1.0
        printable = ", ".join(f"{float(r):.4f}" for r in ratios)
        print(f"audit ratios at eps={min(meshes):.6f}: {printable} "
              f"(spread {spread:.4f})")
        print()


if __name__ == "__main__":
    main()
