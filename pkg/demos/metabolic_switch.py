#!/usr/bin/env python3
"""Find where a small metabolic network switches pathway usage.

Substrate A enters through an uptake reaction whose capacity follows
Michaelis-Menten kinetics in the external concentration C.  Two routes
convert A to the product B: ``r1`` is efficient (yield 1) but capped at
flux 3, ``r2`` is lossy (yield 0.5) but unlimited.  The question a plain
FBA sweep answers point by point - at which concentrations does the cell
start using the lossy route? - is answered here exactly, as a partition
of the saturation axis theta = C / (Km + C).
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from mplp import (
    HPolyhedron,
    KineticParams,
    RunConfig,
    load_model,
    metabolic_modes,
    michaelis_menten_lb,
    partition,
    recovered_flux,
    to_parametric_lp,
)

MODEL = {
    "metabolites": ["A", "B"],
    "reactions": [
        {"id": "ex_a", "reversible": True, "ub": 0.0,
         "param": {"index": 0, "vmax": 10.0}},
        {"id": "r1", "reversible": False, "ub": 3.0},
        {"id": "r2", "reversible": False},
        {"id": "ex_b", "reversible": False},
    ],
    "stoich": [["A", "ex_a", -1.0], ["A", "r1", -1.0], ["B", "r1", 1.0],
               ["A", "r2", -1.0], ["B", "r2", 0.5], ["B", "ex_b", -1.0]],
    "objective": "ex_b",
}


def main():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.json"
        path.write_text(json.dumps(MODEL))
        model = load_model(path)

    lp, legend = to_parametric_lp(model)
    print(f"model: {len(model.metabolites)} metabolites, "
          f"{len(model.reactions)} reactions; standard form "
          f"{lp.m} x {lp.n}, {lp.q} parameter")
    for index, entries in legend.parameters.items():
        for rid, vmax in entries:
            print(f"  theta_{index}: saturation of '{rid}' "
                  f"(uptake bound {-vmax} * theta)")

    res = partition(lp, HPolyhedron.from_box(legend.box_lo, legend.box_hi),
                    RunConfig(resolution="qp"))
    report = metabolic_modes(res, model, legend)
    print(f"\n{len(report['modes'])} metabolic modes over theta in [0, 1]:")
    for mode in report["modes"]:
        never = ", ".join(mode["never_active"]) or "none"
        print(f"  mode {mode['mode']}: never-active reactions: {never}")
    for edge in report["adjacency"]:
        a, b = edge["modes"]
        print(f"  boundary between modes {a} and {b}: "
              f"usage of {', '.join(edge['changed'])} changes")

    # Back on the concentration axis: theta = C/(Km+C), so the mode
    # boundary at theta* sits at C* = Km * theta*/(1-theta*).
    km, vmax = 2.0, 10.0
    print(f"\nfluxes at sample concentrations (Km={km}, vmax={vmax}):")
    header = "  C      theta  " + "  ".join(f"{r.id:>5}"
                                            for r in model.reactions)
    print(header)
    for conc in (0.2, 0.5, 1.0, 2.0, 8.0):
        k = KineticParams(v_max=vmax, K_m=km, C=conc)
        theta = -michaelis_menten_lb(k) / vmax
        cr = res.find([theta])
        v = recovered_flux(lp, cr.primal([theta]), [theta])
        row = "  ".join(f"{val:5.2f}" for val in v)
        print(f"  {conc:4.1f}   {theta:.3f}  {row}")

    print("\nsame run from the shell:")
    print("  mplp partition model.json --resolve qp")


if __name__ == "__main__":
    main()
