"""Command-line front end.

Subcommands: verify, constants, height-prob, cumulants, sample, scaling.
Output goes to stdout or --out as CSV (leading `#schema=name@version`
comment, then a header) or JSONL (first record carries the schema).  Exit
codes: 0 success, 1 a consistency or assertion failure, 2 usage errors.
Identical invocations with identical seeds produce byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .constants import (
    C2_CLOSED,
    constant_for,
    height_one_infinite_z2,
    square_degeneration_constant,
)
from .cumulants import cumulant
from .grassmann import (
    GrassmannAlgebra,
    gaussian_expectation,
    dirichlet_state,
    pinned_state,
    height_one_weight,
    site_algebra,
    wick_minor,
)
from .greenfn import dirichlet_green
from .lattice import Edge, build_box, build_triangular_patch
from .moments import height_one_moment, height_one_prob, spanning_tree_edge_prob
from .samplers import chain_sample, wilson_sample
from .scaling import (
    BumpFunction,
    convergence_sweep,
    normalization_audit,
    parse_mesh,
    smeared_cumulant,
)
from .combinatorics import stirling_alternating_sum


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _emit(rows, columns, schema, args):
    out = sys.stdout if args.out is None else open(args.out, "w")
    try:
        if args.format == "csv":
            out.write(f"#schema={schema}\n")
            out.write(",".join(columns) + "\n")
            for row in rows:
                out.write(",".join(_fmt(row[c]) for c in columns) + "\n")
        else:
            out.write(json.dumps({"schema": schema}) + "\n")
            for row in rows:
                out.write(json.dumps({c: row[c] for c in columns}) + "\n")
    finally:
        if args.out is not None:
            out.close()


def _build_lattice(args, need_box=True):
    kind = args.lattice
    if kind == "tri":
        if args.radius is None:
            raise UsageError("--radius is required for the triangular lattice")
        return build_triangular_patch(args.radius)
    dim = {"z2": 2, "z3": 3, "z4": 4}.get(kind)
    if dim is None:
        raise UsageError(f"unknown lattice {kind!r}")
    if args.box is None:
        if need_box:
            raise UsageError("--box is required for hypercubic lattices")
        return None
    sides = tuple(int(s) for s in args.box.lower().split("x"))
    if len(sides) != dim:
        raise UsageError(f"--box needs {dim} sides for {kind}")
    return build_box(dim, sides)


def _parse_vertex_points(text, lat):
    ids = []
    for chunk in text.split(";"):
        coord = tuple(int(c) for c in chunk.strip().lstrip("(").rstrip(")").split(","))
        ids.append(lat.vertex_id(coord))
    return ids


def _parse_continuum_points(text):
    pts = []
    for chunk in text.split(";"):
        coord = tuple(float(c) for c in chunk.strip().lstrip("(").rstrip(")").split(","))
        if len(coord) != 2:
            raise UsageError("continuum points are x,y pairs")
        pts.append(coord)
    return pts


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# verify

def _verify_rows():
    rng = np.random.default_rng(20240801)
    rows = []

    def check(name, ok, detail=""):
        rows.append({"check": name, "status": "PASS" if ok else "FAIL", "detail": detail})

    # Gaussian integral equals the determinant, random 3x3 exact matrices
    ok = True
    for _ in range(5):
        mat = [[Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))) for _ in range(3)]
               for _ in range(3)]
        alg = GrassmannAlgebra(3, exact=True)
        lhs = gaussian_expectation(alg.one(), mat)
        from ._linalg import det_exact

        if lhs != det_exact(mat):
            ok = False
    check("berezin-exp-equals-det", ok)

    # pair moments match the minor formula
    ok = True
    alg = GrassmannAlgebra(3, exact=True)
    mat = [[2, 1, 0], [1, 3, 1], [0, 1, 2]]
    for (i, j) in ((0, 0), (0, 2), (1, 0)):
        mono = alg.psi(i) * alg.psibar(j)
        direct = gaussian_expectation(mono, mat)
        if direct != wick_minor(mat, (i,), (j,), exact=True):
            ok = False
    check("wick-pair-minors", ok)

    # pinned equals unpinned on a 1x2 box for an even observable
    lat = build_box(2, (1, 2))
    alg_d = site_algebra(lat, exact=True)
    alg_p = site_algebra(lat, exact=True, with_ghost=True)
    f_d = height_one_weight(alg_d, lat, 0)
    f_p = height_one_weight(alg_p, lat, 0)
    want = height_one_prob(lat, [0], exact=True)
    ok = dirichlet_state(f_d, lat) == pinned_state(f_p, lat) == want
    check("pinned-equals-dirichlet", ok)

    # height probability does not depend on the marked directions
    lat = build_box(2, (4, 4))
    ids = [lat.vertex_id((1, 1)), lat.vertex_id((2, 2))]
    vals = {height_one_prob(lat, ids, eta=(a, b)) for a in range(4) for b in range(4)}
    spread = max(vals) - min(vals)
    check("marking-invariance", spread < 1e-12, f"spread={spread:.2e}")

    # closed and partition cumulants agree on a 5x5 pair
    lat = build_box(2, (5, 5))
    ids = [lat.vertex_id((1, 1)), lat.vertex_id((3, 3))]
    a = float(cumulant(lat, ids, field="degree", method="closed").value)
    b = float(cumulant(lat, ids, field="degree", method="partition").value)
    check("cumulant-paths-agree", abs(a - b) < 1e-12, f"delta={abs(a - b):.2e}")

    # the Stirling collapse behind the bare reduction
    ok = stirling_alternating_sum(1) == 1 and all(
        stirling_alternating_sum(m) == 0 for m in range(2, 9)
    )
    check("stirling-collapse", ok)

    # exact square constant against its closed form
    res = constant_for("z2")
    check("square-constant-closed-form", res.exact == C2_CLOSED,
          f"value={res.value!r}")
    return rows


def cmd_verify(args):
    rows = _verify_rows()
    _emit(rows, ["check", "status", "detail"], "verify@1", args)
    return 0 if all(r["status"] == "PASS" for r in rows) else 1


# ---------------------------------------------------------------------------
# constants

def cmd_constants(args):
    res = constant_for(args.lattice)
    rows = [{
        "kind": res.kind,
        "value": res.value,
        "closed_form": res.closed_form if res.closed_form is not None else "",
        "delta": (res.value - res.closed_form) if res.closed_form is not None else "",
        "note": res.note,
    }]
    if args.lattice == "z2":
        degen = square_degeneration_constant()
        rows.append({
            "kind": degen.kind,
            "value": degen.value,
            "closed_form": degen.closed_form,
            "delta": degen.value - degen.closed_form,
            "note": degen.note,
        })
        single = height_one_infinite_z2()
        rows.append({
            "kind": "z2-single-site",
            "value": float(single),
            "closed_form": float(2 / math.pi**2 - 4 / math.pi**3),
            "delta": float(single) - (2 / math.pi**2 - 4 / math.pi**3),
            "note": "single-site height-one probability, infinite volume",
        })
    if args.ledger:
        led_rows = [{
            "kind": res.kind,
            "subset": "+".join(str(s) for s in t["subset"]),
            "size": t["size"],
            "contribution": t["contribution"],
        } for t in res.subset_terms]
        _emit(led_rows, ["kind", "subset", "size", "contribution"],
              "constants-ledger@1", args)
        return 0
    _emit(rows, ["kind", "value", "closed_form", "delta", "note"], "constants@1", args)
    return 0


# ---------------------------------------------------------------------------
# height-prob

def cmd_height_prob(args):
    lat = _build_lattice(args)
    ids = _parse_vertex_points(args.points, lat)
    green = dirichlet_green(lat) if lat.n_vertices <= 3200 else None
    rows = []
    p1 = height_one_prob(lat, ids, green=green)
    rows.append({"path": "inclusion-exclusion", "value": p1})
    p2 = height_one_moment(lat, ids, green=green)
    rows.append({"path": "direction-averaged", "value": p2})
    rows.append({"path": "paths-delta", "value": abs(p1 - p2)})
    _emit(rows, ["path", "value"], "heightprob@1", args)
    return 0 if abs(p1 - p2) < 1e-9 else 1


# ---------------------------------------------------------------------------
# cumulants

def cmd_cumulants(args):
    lat = _build_lattice(args)
    ids = _parse_vertex_points(args.points, lat)
    field = args.field.replace("-", "_")
    rows = []
    methods = ["closed", "partition"] if args.path == "both" else [args.path]
    values = {}
    for method in methods:
        rep = cumulant(lat, ids, field=field, method=method)
        values[method] = float(rep.value)
        rows.append({
            "field": field,
            "n": len(ids),
            "path": rep.method,
            "value": float(rep.value),
            "terms": rep.term_count,
            "note": rep.note,
        })
    status = 0
    if len(values) == 2:
        delta = abs(values["closed"] - values["partition"])
        scale = max(1e-30, abs(values["closed"]))
        rows.append({"field": field, "n": len(ids), "path": "paths-delta",
                     "value": delta, "terms": 0, "note": ""})
        if delta > 1e-9 * max(1.0, scale):
            status = 1
    _emit(rows, ["field", "n", "path", "value", "terms", "note"], "cumulant@1", args)
    return status


# ---------------------------------------------------------------------------
# sample

def cmd_sample(args):
    lat = _build_lattice(args)
    rows = []
    if args.sampler == "chain":
        res = chain_sample(lat, args.steps, args.seed)
        small = lat.n_vertices <= 1600
        green = dirichlet_green(lat) if small else None
        for v in range(lat.n_vertices):
            row = {
                "vertex": v,
                "coord": " ".join(str(c) for c in lat.coords[v]),
                "freq": float(res.freq[v]),
                "stderr": float(res.stderr[v]),
            }
            if small:
                exact = height_one_prob(lat, [v], green=green)
                row["reference"] = exact
                err = max(res.stderr[v], 1e-12)
                row["zscore"] = (res.freq[v] - exact) / err
            else:
                row["reference"] = ""
                row["zscore"] = ""
            rows.append(row)
        _emit(rows, ["vertex", "coord", "freq", "stderr", "reference", "zscore"],
              "sample@1", args)
        bad = [r for r in rows if r["zscore"] != "" and abs(r["zscore"]) > 5.0]
        return 1 if bad else 0
    # wilson: track the star edges of the most central vertex
    mean = [sum(cs) / lat.n_vertices for cs in zip(*lat.coords)]
    center = min(
        range(lat.n_vertices),
        key=lambda v: sum((c - m) ** 2 for c, m in zip(lat.coords[v], mean)),
    )
    edges = [e for e in lat.edge_star(center) if lat.edge_tip_id(e) is not None]
    res = wilson_sample(lat, args.steps, args.seed, edges=edges)
    green = dirichlet_green(lat) if lat.n_vertices <= 1600 else None
    status = 0
    for j, e in enumerate(edges):
        row = {
            "edge": f"{e.base}:{e.direction}",
            "freq": float(res.edge_freq[j]),
            "stderr": float(res.edge_stderr[j]),
        }
        if green is not None:
            ref = spanning_tree_edge_prob(lat, [e], green=green)
            row["reference"] = ref
            err = max(res.edge_stderr[j], 1e-12)
            row["zscore"] = (res.edge_freq[j] - ref) / err
            if abs(row["zscore"]) > 5.0:
                status = 1
        else:
            row["reference"] = ""
            row["zscore"] = ""
        rows.append(row)
    _emit(rows, ["edge", "freq", "stderr", "reference", "zscore"], "sample@1", args)
    return status


# ---------------------------------------------------------------------------
# scaling

def cmd_scaling(args):
    field = args.field.replace("-", "_")
    eps_list = [parse_mesh(e) for e in args.eps.split(",")]
    rows = []
    if args.bumps:
        bumps = []
        for chunk in args.bumps.split(";"):
            cx, cy, rad, amp = (float(x) for x in chunk.split(","))
            bumps.append(BumpFunction(center=(cx, cy), radius=rad, amplitude=amp))
        for eps in sorted(eps_list, reverse=True):
            est, target = smeared_cumulant(field, bumps, eps, per_axis=args.nodes)
            rel = abs(est - target) / max(1e-30, abs(target))
            rows.append({"eps": eps, "lattice_value": est, "target": target,
                         "rel_error": rel})
        _emit(rows, ["eps", "lattice_value", "target", "rel_error"],
              "scaling-smeared@1", args)
        return 0
    points = _parse_continuum_points(args.points)
    sweep = convergence_sweep(field, points, eps_list)
    for r in sweep:
        rows.append({"eps": r.eps, "lattice_value": r.lattice_value,
                     "target": r.target, "abs_error": r.abs_error,
                     "rel_error": r.rel_error})
    _emit(rows, ["eps", "lattice_value", "target", "abs_error", "rel_error"],
          "scaling@1", args)
    return 0


# ---------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(
        prog="fgfflab",
        description="exact and stochastic checks for sandpile height-one and "
                    "spanning-tree degree fields",
    )
    p.add_argument("--version", action="version", version=f"fgfflab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(q, box=True):
        q.add_argument("--lattice", default="z2", choices=["z2", "z3", "z4", "tri"])
        if box:
            q.add_argument("--box", default=None, help="sides like 7x7 or 5x5x5")
            q.add_argument("--radius", type=int, default=None,
                           help="ball radius for the triangular lattice")
        q.add_argument("--out", default=None)
        q.add_argument("--format", default="csv", choices=["csv", "jsonl"])
        q.add_argument("--threads", type=int, default=1,
                       help="reserved; all computations are single-threaded")

    q = sub.add_parser("verify", help="run the internal identity battery")
    common(q, box=False)
    q.set_defaults(fn=cmd_verify)

    q = sub.add_parser("constants", help="lattice normalization constants")
    common(q, box=False)
    q.add_argument("--ledger", action="store_true", help="emit per-subset terms")
    q.set_defaults(fn=cmd_constants)

    q = sub.add_parser("height-prob", help="height-one probabilities, both routes")
    common(q)
    q.add_argument("--points", required=True, help="vertex coords like 3,3;5,5")
    q.set_defaults(fn=cmd_height_prob)

    q = sub.add_parser("cumulants", help="joint cumulants, closed and partition routes")
    common(q)
    q.add_argument("--points", required=True)
    q.add_argument("--field", default="degree",
                   choices=["degree", "neg-degree", "height1"])
    q.add_argument("--path", default="both", choices=["both", "closed", "partition"])
    q.set_defaults(fn=cmd_cumulants)

    q = sub.add_parser("sample", help="Monte Carlo with deterministic seeding")
    common(q)
    q.add_argument("--sampler", default="chain", choices=["chain", "wilson"])
    q.add_argument("--steps", type=int, default=200000,
                   help="chain steps, or spanning-tree samples for wilson")
    q.add_argument("--seed", type=int, default=1)
    q.set_defaults(fn=cmd_sample)

    q = sub.add_parser("scaling", help="disk scaling sweeps and smeared cumulants")
    common(q, box=False)
    q.add_argument("--points", default=None, help="continuum points like 0.3,0;-0.3,0")
    q.add_argument("--eps", required=True, help="meshes like 1/16,1/32,1/64")
    q.add_argument("--field", default="degree",
                   choices=["degree", "neg-degree", "height1"])
    q.add_argument("--bumps", default=None,
                   help="test functions cx,cy,radius,amplitude;... (smeared mode)")
    q.add_argument("--nodes", type=int, default=8, help="quadrature nodes per axis")
    q.set_defaults(fn=cmd_scaling)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    if args.command == "scaling" and not args.bumps and not args.points:
        parser.error("scaling needs --points or --bumps")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
