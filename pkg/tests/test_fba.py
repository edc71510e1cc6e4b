import json

import numpy as np
import pytest
from numpy.random import default_rng
from numpy.testing import assert_allclose

from mplp.engine import RunConfig, partition
from mplp.errors import FormatError
from mplp.fba import (
    KineticParams,
    MetabolicModel,
    load_model,
    metabolic_modes,
    michaelis_menten_lb,
    recovered_flux,
    to_parametric_lp,
)
from mplp.geometry import HPolyhedron
from mplp.lp import solve_lp


# ---------------------------------------------------------------------------
# fixtures

def _toy_doc():
    """Two routes from substrate to product, one capped and one lossy:
    below 30% saturation the lossy route is never used, above it both
    run, so the box splits into two metabolic modes."""
    return {
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


def _minimal_doc():
    """One metabolite, two reactions, no parametric bounds."""
    return {
        "metabolites": ["A"],
        "reactions": [
            {"id": "ex_in", "reversible": True, "lb": -5.0, "ub": 0.0},
            {"id": "ex_out", "reversible": False},
        ],
        "stoich": [["A", "ex_in", -1.0], ["A", "ex_out", -1.0]],
        "objective": "ex_out",
    }


def _write(tmp_path, doc, name="model.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def toy_model(tmp_path):
    return load_model(_write(tmp_path, _toy_doc()))


# ---------------------------------------------------------------------------
# loading and validation

def test_load_minimal_model(tmp_path):
    model = load_model(_write(tmp_path, _minimal_doc()))
    assert len(model.metabolites) == 1
    assert len(model.reactions) == 2
    assert model.q == 0
    assert model.objective == "ex_out"
    assert model.reactions[0].reversible
    assert model.reactions[0].lb == -5.0


def test_load_toy_model(toy_model):
    assert [r.id for r in toy_model.reactions] == ["ex_a", "r1", "r2", "ex_b"]
    assert toy_model.q == 1
    assert toy_model.reactions[0].param == (0, 10.0)
    assert_allclose(toy_model.S.toarray(),
                    [[-1.0, -1.0, -1.0, 0.0], [0.0, 1.0, 0.5, -1.0]])


def test_load_rejects_duplicate_reaction(tmp_path):
    doc = _toy_doc()
    doc["reactions"].append({"id": "r1", "reversible": False})
    with pytest.raises(FormatError, match="duplicate reaction"):
        load_model(_write(tmp_path, doc))


def test_load_rejects_unknown_ids(tmp_path):
    doc = _toy_doc()
    doc["stoich"].append(["C", "r1", 1.0])
    with pytest.raises(FormatError, match="unknown metabolite 'C'"):
        load_model(_write(tmp_path, doc))
    doc = _toy_doc()
    doc["stoich"].append(["A", "nope", 1.0])
    with pytest.raises(FormatError, match="unknown reaction 'nope'"):
        load_model(_write(tmp_path, doc))
    doc = _toy_doc()
    doc["objective"] = "nope"
    with pytest.raises(FormatError, match="objective"):
        load_model(_write(tmp_path, doc))


def test_load_rejects_invalid_bounds(tmp_path):
    doc = _toy_doc()
    doc["reactions"][1]["lb"] = -1.0          # irreversible, negative lb
    with pytest.raises(FormatError, match="irreversible"):
        load_model(_write(tmp_path, doc))
    doc = _toy_doc()
    doc["reactions"][0]["lb"] = -2.0          # fixed lb alongside param
    with pytest.raises(FormatError, match="both 'lb' and 'param'"):
        load_model(_write(tmp_path, doc))
    doc = _toy_doc()
    doc["reactions"][0]["param"]["vmax"] = 0.0
    with pytest.raises(FormatError, match="vmax"):
        load_model(_write(tmp_path, doc))


def test_load_rejects_gapped_parameter_indices(tmp_path):
    doc = _toy_doc()
    doc["reactions"][0]["param"]["index"] = 1
    with pytest.raises(FormatError, match="contiguous"):
        load_model(_write(tmp_path, doc))


def test_load_parse_error_has_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"metabolites": [,]}')
    with pytest.raises(FormatError, match="line 1"):
        load_model(path)


# ---------------------------------------------------------------------------
# kinetics

def test_michaelis_menten_values():
    assert michaelis_menten_lb(KineticParams(8.0, 2.0, 0.0)) == 0.0
    assert_allclose(michaelis_menten_lb(KineticParams(8.0, 2.0, 2.0)), -4.0)
    lb = michaelis_menten_lb(KineticParams(8.0, 2.0, 2.0e9))
    assert abs(lb - (-8.0)) <= 1e-8 * 8.0


def test_michaelis_menten_monotone_and_bounded():
    ks = [KineticParams(5.0, 1.5, c) for c in np.linspace(0.0, 50.0, 40)]
    vals = [michaelis_menten_lb(k) for k in ks]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert all(v > -5.0 for v in vals)


def test_kinetic_params_domain():
    with pytest.raises(ValueError):
        KineticParams(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        KineticParams(1.0, -1.0, 1.0)
    with pytest.raises(ValueError):
        KineticParams(1.0, 1.0, -0.1)


# ---------------------------------------------------------------------------
# parametric LP construction

def test_to_parametric_lp_toy_shapes(toy_model):
    lp, legend = to_parametric_lp(toy_model)
    # 2 balance rows + 2 finite upper bounds; 4 fluxes + 2 slacks.
    assert (lp.m, lp.n, lp.q) == (4, 6, 1)
    assert legend.parameters == {0: [("ex_a", 10.0)]}
    assert_allclose(legend.box_lo, [0.0])
    assert_allclose(legend.box_hi, [1.0])


def test_to_parametric_lp_without_params(tmp_path):
    model = load_model(_write(tmp_path, _minimal_doc()))
    lp, legend = to_parametric_lp(model)
    assert lp.q == 1                       # placeholder axis, F identically 0
    assert np.abs(lp.F.toarray()).max() == 0.0
    assert legend.parameters == {}
    res = partition(lp, HPolyhedron.from_box(legend.box_lo, legend.box_hi),
                    RunConfig(resolution="none"))
    assert len(res.regions) == 1
    assert res.complete
    v = recovered_flux(lp, res.regions[0].primal([0.5]), [0.5])
    assert_allclose(v, [-5.0, 5.0], atol=1e-9)


def test_round_trip_flux_recovery(toy_model):
    """Any standard-form solution recovers to fluxes satisfying the
    balances and every model bound."""
    lp, _ = to_parametric_lp(toy_model)
    S = toy_model.S.toarray()
    for theta in ([0.0], [0.15], [0.3], [0.77], [1.0]):
        sol = solve_lp(lp, theta)
        assert sol.status == "optimal"
        v = recovered_flux(lp, sol.x, theta)
        assert np.abs(S @ v).max() <= 1e-8
        assert v[0] >= -10.0 * theta[0] - 1e-8     # parametric uptake bound
        assert v[0] <= 1e-8
        assert 0.0 - 1e-8 <= v[1] <= 3.0 + 1e-8
        assert v[2] >= -1e-8 and v[3] >= -1e-8


# ---------------------------------------------------------------------------
# mode interpretation

def test_toy_modes(toy_model):
    lp, legend = to_parametric_lp(toy_model)
    res = partition(lp, HPolyhedron.from_box(legend.box_lo, legend.box_hi),
                    RunConfig(resolution="none"))
    report = metabolic_modes(res, toy_model, legend)
    assert len(report["modes"]) == 2
    by_never = {tuple(m["never_active"]): m for m in report["modes"]}
    assert set(by_never) == {(), ("r2",)}
    lossy_off = by_never[("r2",)]
    assert lossy_off["flux_signs"] == {"ex_a": -1, "r1": 1, "r2": 0,
                                       "ex_b": 1}
    assert "r2" not in lossy_off["active"]
    assert report["adjacency"] == [{"modes": [0, 1], "changed": ["r2"]}]
    assert report["parameters"] == {
        "0": [{"reaction": "ex_a", "vmax": 10.0}]}


def test_never_active_is_zero_on_every_optimum(toy_model):
    """Semantic check of the never-active sets: at sampled parameters the
    solver's optimal vertex carries zero flux for each listed reaction."""
    lp, legend = to_parametric_lp(toy_model)
    res = partition(lp, HPolyhedron.from_box(legend.box_lo, legend.box_hi),
                    RunConfig(resolution="none"))
    report = metabolic_modes(res, toy_model, legend)
    pos = {r.id: j for j, r in enumerate(toy_model.reactions)}
    rng = default_rng(2)
    for mode in report["modes"]:
        for rid_region in mode["regions"]:
            cr = next(c for c in res.regions if c.id == rid_region)
            center, radius = np.asarray(cr.probe), 0.02
            for _ in range(3):
                theta = center + rng.uniform(-radius, radius, center.size)
                if not cr.region.contains(theta, tol=1e-9):
                    continue
                v = recovered_flux(lp, solve_lp(lp, theta).x, theta)
                for rid in mode["never_active"]:
                    assert abs(v[pos[rid]]) <= 1e-8


def test_modes_reject_foreign_partition(tmp_path, toy_model):
    other = load_model(_write(tmp_path, _minimal_doc()))
    lp, legend = to_parametric_lp(other)
    res = partition(lp, HPolyhedron.from_box(legend.box_lo, legend.box_hi),
                    RunConfig(resolution="none"))
    with pytest.raises(FormatError, match="not produced from this model"):
        metabolic_modes(res, toy_model, legend)


def test_single_region_model_has_one_mode_no_adjacency(tmp_path):
    model = load_model(_write(tmp_path, _minimal_doc()))
    lp, legend = to_parametric_lp(model)
    res = partition(lp, HPolyhedron.from_box(legend.box_lo, legend.box_hi),
                    RunConfig(resolution="none"))
    report = metabolic_modes(res, model, legend)
    assert len(report["modes"]) == 1
    assert report["adjacency"] == []
    assert report["modes"][0]["flux_signs"]["ex_in"] == -1
