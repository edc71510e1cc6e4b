"""Flux-balance-analysis adapter: stoichiometric models as parametric LPs.

Substrate-limited uptake enters through Michaelis-Menten kinetics: scaling
the saturation fraction into [0, 1] turns every kinetic lower bound into a
parametric bound  v >= -theta * v_max, so a partition of the parameter box
enumerates the metabolic modes of the network."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import Partition, problem_fingerprint
from .errors import FormatError
from .geometry import chebyshev_center_region
from .lp import Bound, GeneralLP, StandardFormLP, to_standard_form
from .sparsela import SparseMatrix
from .tolerances import TAU_FEAS, tau_zero


@dataclass
class Reaction:
    id: str
    reversible: bool = False
    lb: float = None
    ub: float = None
    param: tuple = None        # (parameter index, v_max)


@dataclass
class MetabolicModel:
    """Stoichiometric network with optional parametric uptake bounds."""
    metabolites: list
    reactions: list
    S: SparseMatrix            # metabolites x reactions
    objective: str

    @property
    def q(self):
        idx = {r.param[0] for r in self.reactions if r.param is not None}
        return max(idx) + 1 if idx else 0

    def reaction_index(self, rid):
        for k, r in enumerate(self.reactions):
            if r.id == rid:
                return k
        raise KeyError(rid)


@dataclass
class KineticParams:
    """Michaelis-Menten uptake data: rate cap, half-saturation, substrate."""
    v_max: float
    K_m: float
    C: float

    def __post_init__(self):
        if not self.v_max > 0:
            raise ValueError(f"v_max must be positive, got {self.v_max}")
        if not self.K_m > 0:
            raise ValueError(f"K_m must be positive, got {self.K_m}")
        if self.C < 0:
            raise ValueError(f"concentration must be nonnegative, got {self.C}")


def michaelis_menten_lb(k: KineticParams) -> float:
    """Maximum uptake rate at substrate level C, as a (negative) lower
    flux bound:  -v_max * C / (K_m + C)."""
    return -k.v_max * k.C / (k.K_m + k.C)


@dataclass
class ParameterLegend:
    """What each parameter axis means: the reactions it bounds (with their
    v_max) and the default box of scaled saturation fractions."""
    parameters: dict           # index -> [(reaction id, v_max), ...]
    box_lo: np.ndarray
    box_hi: np.ndarray


# ---------------------------------------------------------------------------
# model loading

def _require(doc, key, kind, where):
    if key not in doc:
        raise FormatError(f"{where}: missing field '{key}'")
    value = doc[key]
    if not isinstance(value, kind):
        raise FormatError(f"{where}: field '{key}' has wrong type "
                          f"({type(value).__name__})")
    return value


def _opt_number(doc, key, where):
    if key not in doc or doc[key] is None:
        return None
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"{where}: field '{key}' must be a number")
    return float(value)


def load_model(path) -> MetabolicModel:
    """Read and validate a model JSON file.

    Format: ``{"metabolites": [id...], "reactions": [{"id", "reversible",
    "lb", "ub", "param": {"index", "vmax"}}...], "stoich": [[metabolite,
    reaction, coeff]...], "objective": id}``.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read model file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"{path}: JSON parse error at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be an object")

    metabolites = _require(doc, "metabolites", list, str(path))
    if not all(isinstance(m, str) for m in metabolites):
        raise FormatError(f"{path}: metabolite ids must be strings")
    if len(set(metabolites)) != len(metabolites):
        raise FormatError(f"{path}: duplicate metabolite id")

    reactions = []
    for k, rdoc in enumerate(_require(doc, "reactions", list, str(path))):
        where = f"{path}: reactions[{k}]"
        if not isinstance(rdoc, dict):
            raise FormatError(f"{where}: must be an object")
        rid = _require(rdoc, "id", str, where)
        reversible = bool(rdoc.get("reversible", False))
        lb = _opt_number(rdoc, "lb", where)
        ub = _opt_number(rdoc, "ub", where)
        param = None
        if rdoc.get("param") is not None:
            pdoc = _require(rdoc, "param", dict, where)
            index = _require(pdoc, "index", int, f"{where}.param")
            if isinstance(index, bool) or index < 0:
                raise FormatError(f"{where}.param: index must be a "
                                  "nonnegative integer")
            vmax = _require(pdoc, "vmax", (int, float), f"{where}.param")
            if isinstance(vmax, bool) or not vmax > 0:
                raise FormatError(f"{where}.param: vmax must be positive")
            if lb is not None:
                raise FormatError(f"{where}: both 'lb' and 'param' given; "
                                  "a parametric bound replaces the fixed one")
            param = (int(index), float(vmax))
        if not reversible and lb is not None and lb < 0:
            raise FormatError(f"{where}: irreversible reaction with "
                              f"negative lower bound {lb}")
        if lb is not None and ub is not None and lb > ub:
            raise FormatError(f"{where}: lb {lb} exceeds ub {ub}")
        reactions.append(Reaction(id=rid, reversible=reversible,
                                  lb=lb, ub=ub, param=param))
    rids = [r.id for r in reactions]
    if len(set(rids)) != len(rids):
        raise FormatError(f"{path}: duplicate reaction id")

    met_pos = {m: i for i, m in enumerate(metabolites)}
    rxn_pos = {r: j for j, r in enumerate(rids)}
    rows, cols, vals = [], [], []
    for k, entry in enumerate(_require(doc, "stoich", list, str(path))):
        where = f"{path}: stoich[{k}]"
        if not (isinstance(entry, list) and len(entry) == 3):
            raise FormatError(f"{where}: expected [metabolite, reaction, "
                              "coefficient]")
        met, rxn, coeff = entry
        if met not in met_pos:
            raise FormatError(f"{where}: unknown metabolite '{met}'")
        if rxn not in rxn_pos:
            raise FormatError(f"{where}: unknown reaction '{rxn}'")
        if isinstance(coeff, bool) or not isinstance(coeff, (int, float)) \
                or not np.isfinite(coeff):
            raise FormatError(f"{where}: coefficient must be a finite number")
        rows.append(met_pos[met])
        cols.append(rxn_pos[rxn])
        vals.append(float(coeff))
    try:
        S = SparseMatrix((len(metabolites), len(reactions)), rows, cols, vals)
    except FormatError as exc:
        raise FormatError(f"{path}: stoich: {exc}") from exc

    objective = _require(doc, "objective", str, str(path))
    if objective not in rxn_pos:
        raise FormatError(f"{path}: objective reaction '{objective}' "
                          "not defined")

    used = sorted({r.param[0] for r in reactions if r.param is not None})
    if used and used != list(range(len(used))):
        raise FormatError(f"{path}: parameter indices {used} must be "
                          "contiguous from 0")
    return MetabolicModel(metabolites=list(metabolites), reactions=reactions,
                          S=S, objective=objective)


# ---------------------------------------------------------------------------
# parametric LP construction

def to_parametric_lp(model: MetabolicModel):
    """Standard-form parametric LP for the model, plus a parameter legend.

    Rows are the steady-state balances S v = 0; the objective maximizes
    the designated reaction's flux; a reaction with kinetic data gets the
    scaled parametric bound v >= -theta_p * v_max over the default box
    [0, 1]^q.  A model with no parametric bounds still gets one (unused)
    parameter axis so the partition machinery applies uniformly.
    """
    n = len(model.reactions)
    q = max(model.q, 1)
    c = np.zeros(n)
    c[model.reaction_index(model.objective)] = 1.0
    bounds = []
    legend_entries = {}
    for r in model.reactions:
        if r.param is not None:
            index, vmax = r.param
            lo = Bound(const=0.0, param_index=index, param_scale=-vmax)
            legend_entries.setdefault(index, []).append((r.id, vmax))
        elif r.lb is not None:
            lo = Bound(const=float(r.lb))
        elif r.reversible:
            lo = Bound()
        else:
            lo = Bound(const=0.0)
        hi = Bound(const=float(r.ub)) if r.ub is not None else Bound()
        bounds.append((lo, hi))
    g = GeneralLP(sense="max", c=c,
                  ineq_A=[], ineq_w=[], ineq_F=[],
                  eq_A=model.S.toarray(), eq_w=np.zeros(len(model.metabolites)),
                  eq_F=np.zeros((len(model.metabolites), q)),
                  bounds=bounds, q=q)
    legend = ParameterLegend(parameters=legend_entries,
                             box_lo=np.zeros(q), box_hi=np.ones(q))
    return to_standard_form(g), legend


def recovered_flux(lp: StandardFormLP, x, theta):
    """Original reaction fluxes of a standard-form point."""
    return (lp.recovery_R.matvec(np.asarray(x, float)) + lp.recovery_r
            + lp.recovery_T.matvec(np.asarray(theta, float)))


# ---------------------------------------------------------------------------
# mode interpretation

def never_active_reactions(lp, model, cr):
    """Reactions identically zero across the region's optimal face: every
    standard column carrying the reaction is in the face-level zero set
    and the recovery offsets vanish."""
    R = lp.recovery_R.toarray()
    T = lp.recovery_T.toarray()
    active = set(cr.active_set)
    out = []
    for j, r in enumerate(model.reactions):
        carriers = np.flatnonzero(np.abs(R[j]) > 0)
        if carriers.size == 0:
            continue
        if abs(lp.recovery_r[j]) > TAU_FEAS or np.abs(T[j]).max() > TAU_FEAS:
            continue
        if all(int(k) in active for k in carriers):
            out.append(r.id)
    return out


def _flux_signs(model, v):
    tz = tau_zero(v)
    signs = {}
    for j, r in enumerate(model.reactions):
        signs[r.id] = 0 if abs(v[j]) <= tz else (1 if v[j] > 0 else -1)
    return signs


def metabolic_modes(p: Partition, model: MetabolicModel,
                    legend: ParameterLegend) -> dict:
    """Interpret a partition of the model's parameter box as metabolic
    modes: regions merged by never-active set and reversible-flux
    direction pattern, with the reactions that change across each
    adjacency.  The partition must come from this model's LP."""
    lp, _ = to_parametric_lp(model)
    if p.problem_hash != problem_fingerprint(lp):
        raise FormatError("partition was not produced from this model "
                          f"(hash {p.problem_hash} != "
                          f"{problem_fingerprint(lp)})")
    groups = {}
    for cr in p.regions:
        v = recovered_flux(lp, cr.primal(cr.probe), cr.probe)
        never = never_active_reactions(lp, model, cr)
        signs = _flux_signs(model, v)
        key = (tuple(never),
               tuple((r.id, signs[r.id]) for r in model.reactions
                     if r.reversible))
        groups.setdefault(key, {"regions": [], "never": never,
                                "signs": signs})["regions"].append(cr)
    modes = []
    for k, key in enumerate(sorted(groups)):
        info = groups[key]
        signs = info["signs"]
        modes.append({
            "mode": k,
            "regions": sorted(cr.id for cr in info["regions"]),
            "never_active": list(info["never"]),
            "flux_signs": dict(signs),
            "active": [rid for rid, s in signs.items() if s != 0],
        })
    # Adjacency between merged modes: some pair of their regions touches.
    adjacency = []
    keys = sorted(groups)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            touching = False
            for cra in groups[keys[a]]["regions"]:
                for crb in groups[keys[b]]["regions"]:
                    center, _ = chebyshev_center_region(
                        cra.region.intersect(crb.region))
                    if center is not None:
                        touching = True
                        break
                if touching:
                    break
            if not touching:
                continue
            na = set(groups[keys[a]]["never"])
            nb = set(groups[keys[b]]["never"])
            sa, sb = groups[keys[a]]["signs"], groups[keys[b]]["signs"]
            changed = sorted((na ^ nb)
                             | {rid for rid in sa if sa[rid] != sb[rid]})
            adjacency.append({"modes": [a, b], "changed": changed})
    return {
        "objective": model.objective,
        "parameters": {str(i): [{"reaction": rid, "vmax": vm}
                                for rid, vm in legend.parameters.get(i, [])]
                       for i in sorted(legend.parameters)},
        "modes": modes,
        "adjacency": adjacency,
    }
