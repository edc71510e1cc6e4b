"""Command-line front end: partition parametric LPs from JSON problem
files, evaluate stored partitions at parameter points, and emit 2-D plot
data, with byte-reproducible output for identical configuration."""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import tolerances
from .engine import RunConfig, partition
from .errors import FormatError, MplpError
from .fba import (
    load_model,
    metabolic_modes,
    never_active_reactions,
    to_parametric_lp,
)
from .geometry import HPolyhedron, linf_distance
from .lp import Bound, GeneralLP, to_standard_form
from .tolerances import TAU_FEAS


# ---------------------------------------------------------------------------
# problem input

def _load_general_lp(doc, where):
    """Problem JSON: {sense, c, ineq: [{a, w, f}], eq: [{a, w, f}],
    bounds: [{var, lo, hi, lo_param: {index, scale}}], box: {lo, hi}}."""
    if "c" not in doc:
        raise FormatError(f"{where}: missing field 'c'")
    c = np.asarray(doc["c"], dtype=float)
    n = c.size
    sense = doc.get("sense", "max")
    box = doc.get("box")
    q = len(box["lo"]) if box else int(doc.get("q", 1))

    def block(key):
        A, w, F = [], [], []
        for k, row in enumerate(doc.get(key, [])):
            try:
                a = np.asarray(row["a"], dtype=float)
                wv = float(row["w"])
                f = np.asarray(row.get("f", np.zeros(q)), dtype=float)
            except (KeyError, TypeError, ValueError) as exc:
                raise FormatError(f"{where}: {key}[{k}]: {exc}") from exc
            if a.size != n or f.size != q:
                raise FormatError(f"{where}: {key}[{k}]: row length mismatch")
            A.append(a)
            w.append(wv)
            F.append(f)
        return A, w, F

    ineq_A, ineq_w, ineq_F = block("ineq")
    eq_A, eq_w, eq_F = block("eq")
    bounds = [(Bound(), Bound()) for _ in range(n)]
    for k, bdoc in enumerate(doc.get("bounds", [])):
        if "var" not in bdoc:
            raise FormatError(f"{where}: bounds[{k}]: missing 'var'")
        j = int(bdoc["var"])
        if not 0 <= j < n:
            raise FormatError(f"{where}: bounds[{k}]: variable {j} "
                              "out of range")
        lo = Bound()
        if bdoc.get("lo_param") is not None:
            p = bdoc["lo_param"]
            lo = Bound(const=float(bdoc.get("lo", 0.0)),
                       param_index=int(p["index"]),
                       param_scale=float(p["scale"]))
        elif bdoc.get("lo") is not None:
            lo = Bound(const=float(bdoc["lo"]))
        hi = Bound(const=float(bdoc["hi"])) if bdoc.get("hi") is not None \
            else Bound()
        bounds[j] = (lo, hi)
    g = GeneralLP(sense=sense, c=c, ineq_A=ineq_A, ineq_w=ineq_w,
                  ineq_F=ineq_F, eq_A=eq_A, eq_w=eq_w, eq_F=eq_F,
                  bounds=bounds, q=q)
    return g, box


def _parse_box(text, q):
    """--box LO:HI with comma-separated coordinates, e.g. 0,0:1,1."""
    try:
        lo_text, hi_text = text.split(":")
        lo = np.asarray([float(v) for v in lo_text.split(",")])
        hi = np.asarray([float(v) for v in hi_text.split(",")])
    except ValueError as exc:
        raise FormatError(f"cannot parse --box {text!r}: {exc}") from exc
    if lo.size != q or hi.size != q:
        raise FormatError(f"--box has {lo.size} coordinates, problem has {q}")
    return lo, hi


def _check_box(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size != hi.size or lo.size == 0 or np.any(hi <= lo):
        raise FormatError("degenerate parameter box")
    return lo, hi


# ---------------------------------------------------------------------------
# partition serialization

def _triplets(mat):
    mat = np.asarray(mat, dtype=float)
    rows, cols = np.nonzero(mat)
    return {"shape": list(mat.shape),
            "rows": [int(i) for i in rows],
            "cols": [int(j) for j in cols],
            "vals": [float(mat[i, j]) for i, j in zip(rows, cols)]}


def _from_triplets(doc):
    out = np.zeros(tuple(doc["shape"]))
    out[doc["rows"], doc["cols"]] = doc["vals"]
    return out


def _poly_json(p):
    M, t = p.rows()
    return {"H": {"M": _triplets(M), "t": [float(v) for v in t]}}


def _poly_from_json(doc):
    return HPolyhedron(_from_triplets(doc["H"]["M"]),
                       np.asarray(doc["H"]["t"], dtype=float))


def _never_active_vars(lp, cr):
    """Original variables identically zero on the region's optimal face."""
    R = lp.recovery_R.toarray()
    T = lp.recovery_T.toarray()
    active = set(cr.active_set)
    out = []
    for j in range(R.shape[0]):
        carriers = np.flatnonzero(np.abs(R[j]) > 0)
        if carriers.size == 0:
            continue
        if abs(lp.recovery_r[j]) > TAU_FEAS or np.abs(T[j]).max() > TAU_FEAS:
            continue
        if all(int(k) in active for k in carriers):
            out.append(j)
    return out


def _region_json(lp, cr, never_active):
    M, t = cr.region.rows()
    R = lp.recovery_R.toarray()
    E = R @ cr.E + lp.recovery_T.toarray()
    e = R @ cr.e + lp.recovery_r
    dual = {"lambda_p": [float(v) for v in cr.lam_e],
            "Z_cols": int(cr.Z.shape[1]) if cr.Z is not None else 0}
    if cr.lam_E is not None and np.abs(cr.lam_E).max(initial=0.0) > 0:
        dual["lambda_E"] = _triplets(cr.lam_E)
    dual["mu0_index"] = [int(j) for j in cr.mu_index]
    dual["mu0"] = [float(v) for v in cr.mu_e]
    if cr.mu_E is not None and np.abs(cr.mu_E).max(initial=0.0) > 0:
        dual["mu0_E"] = _triplets(cr.mu_E)
    return {
        "id": int(cr.id),
        "mode_key": [int(j) for j in cr.mode_key],
        "case": cr.case,
        "H": {"M": _triplets(M), "t": [float(v) for v in t]},
        "primal_map": {"E": _triplets(E), "e": [float(v) for v in e]},
        "dual": dual,
        "zero_set": [int(j) for j in cr.active_set],
        "never_active": never_active,
        "probe": [float(v) for v in cr.probe],
    }


def partition_to_json(result, lp, config_doc, never_active_of):
    """Serialize a partition with canonically ordered regions (mode key,
    then H-representation bytes) so identical runs give identical files."""
    def canon(cr):
        M, t = cr.region.rows()
        return (tuple(cr.mode_key), M.tobytes(), t.tobytes())

    regions = []
    for k, cr in enumerate(sorted(result.regions, key=canon)):
        entry = _region_json(lp, cr, never_active_of(cr))
        entry["id"] = k
        regions.append(entry)
    return {
        "problem_hash": result.problem_hash,
        "config": config_doc,
        "q": int(lp.q),
        "complete": bool(result.complete),
        "merged_modes": int(result.merged_counts()),
        "regions": regions,
        "infeasible": [_poly_json(p) for p in result.infeasible],
        "unresolved": [_poly_json(p) for p in result.unresolved],
    }


# ---------------------------------------------------------------------------
# commands

def cmd_partition(args) -> int:
    path = Path(args.input)
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"error: {path}: JSON parse error at line {exc.lineno}: "
              f"{exc.msg}", file=sys.stderr)
        return 1

    if args.tol_zero is not None:
        tolerances.ZERO_REL = args.tol_zero
    lex_costs = None
    if args.lex_cost:
        lex_costs = [[float(v) for v in cost.split(",")]
                     for cost in args.lex_cost]

    kind = "fba-model-json" if "metabolites" in doc else "general-lp-json"
    if kind == "fba-model-json":
        model = load_model(path)
        lp, legend = to_parametric_lp(model)
        lo, hi = legend.box_lo, legend.box_hi
    else:
        g, box = _load_general_lp(doc, str(path))
        lp = to_standard_form(g)
        lo = hi = None
        if box is not None:
            lo, hi = np.asarray(box["lo"], float), np.asarray(box["hi"], float)
    if args.box is not None:
        lo, hi = _parse_box(args.box, lp.q)
    if lo is None:
        print("error: no parameter box (give one in the file or via --box)",
              file=sys.stderr)
        return 1
    lo, hi = _check_box(lo, hi)

    config = RunConfig(resolution=args.resolve, lex_costs=lex_costs,
                       seed=args.seed, workers=args.workers)
    result = partition(lp, HPolyhedron.from_box(lo, hi), config)

    config_doc = {
        "input": str(path),
        "kind": kind,
        "resolution": args.resolve,
        "lex_costs": lex_costs,
        "seed": args.seed,
        "box": {"lo": [float(v) for v in lo], "hi": [float(v) for v in hi]},
        "tol_zero": args.tol_zero,
    }
    if kind == "fba-model-json":
        def never_of(cr):
            return never_active_reactions(lp, model, cr)
    else:
        def never_of(cr):
            return _never_active_vars(lp, cr)
    out_doc = partition_to_json(result, lp, config_doc, never_of)
    if kind == "fba-model-json":
        report = metabolic_modes(result, model, legend)
        out_doc["modes"] = report["modes"]
        out_doc["adjacency"] = report["adjacency"]

    out_path = Path(args.out) if args.out else \
        path.with_suffix(".partition.json")
    out_path.write_text(json.dumps(out_doc, indent=1) + "\n")
    print(f"{len(out_doc['regions'])} regions "
          f"({out_doc['merged_modes']} merged), "
          f"{len(out_doc['infeasible'])} infeasible, "
          f"{len(out_doc['unresolved'])} unresolved -> {out_path}")
    return 0 if result.complete and not result.unresolved else 2


def _eval_region(entry, theta):
    E = _from_triplets(entry["primal_map"]["E"])
    e = np.asarray(entry["primal_map"]["e"], dtype=float)
    x = E @ theta + e
    lam = np.asarray(entry["dual"]["lambda_p"], dtype=float)
    if "lambda_E" in entry["dual"]:
        lam = lam + _from_triplets(entry["dual"]["lambda_E"]) @ theta
    mu = np.asarray(entry["dual"]["mu0"], dtype=float)
    if "mu0_E" in entry["dual"]:
        mu = mu + _from_triplets(entry["dual"]["mu0_E"]) @ theta
    return x, lam, mu


def cmd_eval(args) -> int:
    try:
        doc = json.loads(Path(args.partition).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot load partition: {exc}", file=sys.stderr)
        return 1
    try:
        theta = np.asarray([float(v) for v in args.theta.split(",")])
    except ValueError as exc:
        print(f"error: malformed theta {args.theta!r}: {exc}",
              file=sys.stderr)
        return 1
    if theta.size != doc["q"]:
        print(f"error: theta has {theta.size} coordinates, partition "
              f"has {doc['q']}", file=sys.stderr)
        return 1

    hits = [entry for entry in doc["regions"]
            if _poly_from_json(entry).contains(theta, tol=1e-7)]
    print(f"theta: {json.dumps([float(v) for v in theta])}")
    if hits:
        for entry in hits:
            x, lam, mu = _eval_region(entry, theta)
            print(f"region {entry['id']}  mode_key "
                  f"{json.dumps(entry['mode_key'])}  case {entry['case']}")
            print(f"  x*: {json.dumps([round(float(v), 12) for v in x])}")
            print(f"  lambda: {json.dumps([round(float(v), 12) for v in lam])}")
            print(f"  mu (cols {json.dumps(entry['dual']['mu0_index'])}): "
                  f"{json.dumps([round(float(v), 12) for v in mu])}")
        return 0
    for k, pdoc in enumerate(doc.get("infeasible", [])):
        if _poly_from_json(pdoc).contains(theta, tol=1e-7):
            print(f"infeasible (certified infeasible piece {k})")
            return 0
    best, dist = None, np.inf
    for entry in doc["regions"]:
        d, _ = linf_distance(_poly_from_json(entry), theta)
        if d is not None and d < dist:
            best, dist = entry["id"], d
    print(f"uncovered; nearest region {best} at distance {dist:.6g}")
    return 0


def _polygon_vertices(M, t, tol=1e-7):
    """Vertices of a bounded 2-D polyhedron, counterclockwise."""
    pts = []
    for i in range(M.shape[0]):
        for j in range(i + 1, M.shape[0]):
            A2 = np.array([M[i], M[j]])
            if abs(np.linalg.det(A2)) < 1e-12:
                continue
            v = np.linalg.solve(A2, [t[i], t[j]])
            if np.all(M @ v <= t + tol * np.maximum(1.0, np.abs(t))):
                pts.append(v)
    if not pts:
        return []
    uniq = []
    for v in pts:
        if all(np.abs(v - u).max() > 1e-7 for u in uniq):
            uniq.append(v)
    center = np.mean(uniq, axis=0)
    uniq.sort(key=lambda v: np.arctan2(v[1] - center[1], v[0] - center[0]))
    return uniq


def cmd_plot_data(args) -> int:
    try:
        doc = json.loads(Path(args.partition).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot load partition: {exc}", file=sys.stderr)
        return 1
    if doc["q"] != 2:
        print("error: plot data requires two parameters", file=sys.stderr)
        return 1
    lines = []
    for entry in doc["regions"]:
        M = _from_triplets(entry["H"]["M"])
        t = np.asarray(entry["H"]["t"], dtype=float)
        verts = _polygon_vertices(M, t)
        key = ",".join(str(j) for j in entry["mode_key"]) or "-"
        coords = " ".join(f"{float(v[0])!r} {float(v[1])!r}" for v in verts)
        lines.append(f"{entry['id']} {key} {coords}")
    for k, pdoc in enumerate(doc.get("infeasible", [])):
        M = _from_triplets(pdoc["H"]["M"])
        t = np.asarray(pdoc["H"]["t"], dtype=float)
        verts = _polygon_vertices(M, t)
        coords = " ".join(f"{float(v[0])!r} {float(v[1])!r}" for v in verts)
        lines.append(f"infeasible-{k} - {coords}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# entry point

def _build_parser():
    parser = argparse.ArgumentParser(
        prog="mplp",
        description="Partition a parametric LP's parameter box into "
                    "critical regions with explicit solution maps.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partition", help="partition a problem file")
    p.add_argument("input", help="general-LP or metabolic-model JSON file")
    p.add_argument("--resolve", default="eqcost",
                   choices=["none", "lex", "eqcost", "qp"],
                   help="multiplicity resolution (default eqcost)")
    p.add_argument("--lex-cost", action="append", default=None,
                   metavar="C1,C2,...",
                   help="auxiliary cost vector for --resolve lex "
                        "(repeatable, original variables)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--box", default=None, metavar="LO:HI",
                   help="parameter box, e.g. 0,0:1,1 (overrides the file)")
    p.add_argument("--tol-zero", type=float, default=None,
                   help="relative support-classification threshold")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="output path "
                   "(default: <input>.partition.json)")
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("eval", help="evaluate a stored partition at theta")
    p.add_argument("partition", help="partition JSON file")
    p.add_argument("--theta", required=True, metavar="T1,T2,...")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot-data", help="emit 2-D region polygons")
    p.add_argument("partition", help="partition JSON file")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plot_data)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MplpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
