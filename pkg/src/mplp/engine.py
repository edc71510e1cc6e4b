"""Parameter-space partitioning: probe classification, critical-region
construction for the four degeneracy/multiplicity cases, multiplicity
resolution (lexicographic, equivalent-cost, norm-minimizing QP), and the
recursive search over the remainder.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EquivalentCostError,
    IllConditionedError,
    InfeasibleError,
    IterationLimitError,
    MisclassificationError,
    ProjectionOverflowError,
    RankDeficientError,
    UnboundedError,
)
from .geometry import (
    HPolyhedron,
    build_optimal_face,
    chebyshev_center_region,
    ineq_lp,
    project_polyhedron,
    remove_redundant,
)
from .lp import (
    StandardFormLP,
    VertexSolution,
    lexicographic_solve,
    multiplicity_check,
    solve_lp,
)
from .sparsela import (
    Permutation,
    left_pinv_solve,
    min_norm_dual,
    nullspace_basis,
    permutation_from_partition,
)
from .tolerances import TAU_FEAS, TAU_OBJ, tau_zero

CASE_UNIQUE_ND = "unique-nondegenerate"
CASE_UNIQUE_D = "unique-degenerate"
CASE_MULTIPLE_ND = "multiple-nondegenerate"
CASE_MULTIPLE_D = "multiple-degenerate"

# Work-list iteration cap: beyond this the partial result is returned.
DEFAULT_POP_CAP = 50_000


def _support(x, scale_ref=None):
    ref = x if scale_ref is None else scale_ref
    tz = tau_zero(ref)
    return [int(j) for j in np.nonzero(x > tz)[0]]


@dataclass
class IndexPartition:
    """Two-level split of the variable indices.

    ``j1``/``j0`` partition all columns into nonzero and zero variables at
    the probe; for resolved-multiplicity regions ``j11``/``j10`` further
    partition ``j1`` by the refined point's support.
    """
    j1: list
    j0: list
    n: int
    j11: list = None
    j10: list = None

    def __post_init__(self):
        self.j1 = sorted(int(j) for j in self.j1)
        self.j0 = sorted(int(j) for j in self.j0)
        if set(self.j1) | set(self.j0) != set(range(self.n)) or \
                set(self.j1) & set(self.j0):
            raise ValueError("j1/j0 do not partition the index range")
        if self.j11 is not None:
            self.j11 = sorted(int(j) for j in self.j11)
            self.j10 = sorted(int(j) for j in self.j10)
            if set(self.j11) | set(self.j10) != set(self.j1) or \
                    set(self.j11) & set(self.j10):
                raise ValueError("j11/j10 do not partition j1")

    @property
    def n1(self):
        return len(self.j1)

    @property
    def n0(self):
        return len(self.j0)

    @property
    def n11(self):
        return None if self.j11 is None else len(self.j11)

    @property
    def n10(self):
        return None if self.j10 is None else len(self.j10)

    def permutation(self) -> Permutation:
        return permutation_from_partition(self.j1, self.n)

    def second_permutation(self) -> Permutation:
        if self.j11 is None:
            raise ValueError("no second-level partition")
        # positions of j11 within j1, in the first-level ordering
        pos = {j: k for k, j in enumerate(self.j1)}
        return permutation_from_partition([pos[j] for j in self.j11],
                                          self.n1)


@dataclass
class CriticalRegion:
    """One region of the partition with its affine solution maps.

    The primal map is stored full-size (zeros off the support):
    x(theta) = E theta + e.  ``lam_E``/``lam_e`` give the equality duals
    (constant for the LP cases, affine for the QP cases), ``mu_E``/``mu_e``
    the bound duals on ``mu_index`` (the zero set of the map's level), and
    ``Z`` the stored null-space basis for degenerate duals.
    """
    id: int
    region: HPolyhedron
    case: str
    partition: IndexPartition
    E: np.ndarray
    e: np.ndarray
    lam_E: np.ndarray
    lam_e: np.ndarray
    mu_E: np.ndarray
    mu_e: np.ndarray
    mu_index: list
    Z: np.ndarray
    active_set: tuple          # face-level zero set (optimal active set)
    mode_key: tuple
    resolution: str
    probe: np.ndarray
    active_original: tuple = ()

    def primal(self, theta):
        return self.E @ np.asarray(theta, dtype=float) + self.e

    def duals(self, theta):
        theta = np.asarray(theta, dtype=float)
        return self.lam_E @ theta + self.lam_e, self.mu_E @ theta + self.mu_e


@dataclass
class RunConfig:
    resolution: str = "eqcost"          # none | lex | eqcost | qp
    lex_costs: list = None              # original-variable cost vectors
    seed: int = 0
    U: float = 1e6
    pop_cap: int = DEFAULT_POP_CAP
    workers: int = 1

    def __post_init__(self):
        if self.resolution not in ("none", "lex", "eqcost", "qp"):
            raise ValueError(f"unknown resolution '{self.resolution}'")
        if self.resolution == "lex" and not self.lex_costs:
            raise ValueError("lex resolution requires auxiliary costs")


@dataclass
class Partition:
    problem_hash: str
    config: RunConfig
    regions: list = field(default_factory=list)
    infeasible: list = field(default_factory=list)
    unresolved: list = field(default_factory=list)
    complete: bool = True
    pops: int = 0
    eq_cost: np.ndarray = None

    def merged_counts(self):
        """Number of distinct mode keys among the regions."""
        return len({cr.mode_key for cr in self.regions})

    def find(self, theta, tol=1e-9):
        for cr in self.regions:
            if cr.region.contains(theta, tol=tol):
                return cr
        return None


def problem_fingerprint(lp: StandardFormLP) -> str:
    parts = []
    for mat in (lp.A, lp.F, lp.recovery_R, lp.recovery_T):
        r, c, v = mat.triplets()
        parts.extend([r.tobytes(), c.tobytes(), v.tobytes()])
    parts.extend([lp.w.tobytes(), lp.c.tobytes(),
                  lp.recovery_r.tobytes(), lp.sense.encode()])
    return hashlib.sha256(b"|".join(parts)).hexdigest()[:16]


# ---------------------------------------------------------------------------
# classification

def classify(lp: StandardFormLP, theta, sol: VertexSolution):
    """Case tag, index partition and (for the multiple cases) the optimal
    face at the probe.

    Uniqueness is decided by the multiplicity check; the zero/nonzero
    split comes from the vertex support when unique, and from the
    identically-zero (implicit) coordinates of the optimal face when
    multiple.
    """
    if sol.status != "optimal":
        raise ValueError("classification requires an optimal vertex")
    mult = multiplicity_check(lp, sol, theta)
    if mult == "unique":
        j1 = _support(sol.x)
        part = IndexPartition(j1=j1,
                              j0=[j for j in range(lp.n) if j not in set(j1)],
                              n=lp.n)
        case = CASE_UNIQUE_ND if part.n1 == lp.m else CASE_UNIQUE_D
        return case, part, None
    face = build_optimal_face(lp, theta, sol.z)
    j0 = sorted(face.implicit)
    part = IndexPartition(j1=[j for j in range(lp.n) if j not in set(j0)],
                          j0=j0, n=lp.n)
    # The level-1 tag reflects the face; the degeneracy label for the
    # builders is decided by the second-level split.
    case = CASE_MULTIPLE_ND if part.n1 >= lp.m else CASE_MULTIPLE_D
    return case, part, face


# ---------------------------------------------------------------------------
# critical-region builders (LP cases)

def _scatter_primal(lp, idx, E1, e1):
    E = np.zeros((lp.n, lp.q))
    e = np.zeros(lp.n)
    E[idx] = E1
    e[idx] = e1
    return E, e


def _primal_region(lp, R: HPolyhedron, E1, e1) -> HPolyhedron:
    rows = HPolyhedron(-E1, e1)
    return remove_redundant(R.intersect(rows))


def build_cr_unique_nondegenerate(lp: StandardFormLP, part: IndexPartition,
                                  R: HPolyhedron) -> CriticalRegion:
    """Square-basis region: the primal map inverts the nonzero columns and
    the duals are constant; only primal feasibility bounds the region."""
    if part.n1 != lp.m:
        raise MisclassificationError(
            f"nondegenerate builder needs n1 = m, got {part.n1} != {lp.m}")
    A = lp.dense_A()
    A1 = A[:, part.j1]
    F = lp.F.toarray()
    try:
        sol1 = np.linalg.solve(A1, np.column_stack([lp.w, F]))
        lam = -np.linalg.solve(A1.T, lp.c[part.j1])
    except np.linalg.LinAlgError as exc:
        raise MisclassificationError(
            f"nonzero-column block is singular ({exc})") from exc
    e1, E1 = sol1[:, 0], sol1[:, 1:]
    A0 = A[:, part.j0]
    mu0 = -lp.c[part.j0] - A0.T @ lam
    E, e = _scatter_primal(lp, part.j1, E1, e1)
    region = _primal_region(lp, R, E1, e1)
    q = lp.q
    return CriticalRegion(
        id=-1, region=region, case=CASE_UNIQUE_ND, partition=part,
        E=E, e=e, lam_E=np.zeros((lp.m, q)), lam_e=lam,
        mu_E=np.zeros((part.n0, q)), mu_e=mu0, mu_index=list(part.j0),
        Z=np.zeros((lp.m, 0)), active_set=tuple(part.j0),
        mode_key=tuple(part.j0), resolution="", probe=None)


def _residual_rows(lp, A1, E1, e1):
    """Equality rows pinning the parameters to where the least-squares map
    actually solves the system.  When the probe is interior to its region
    the residual vanishes identically and the rows are numerically zero
    (dropped); a probe on a lower-dimensional locus leaves genuine
    equalities that collapse the region to thinness."""
    F = lp.F.toarray()
    M = F - A1 @ E1
    v = lp.w - A1 @ e1
    scale = max(1.0, float(np.abs(lp.w).max(initial=0.0)))
    live = (np.abs(M).max(axis=1, initial=0.0) > 1e-9) | \
           (np.abs(v) > 1e-9 * scale)
    M, v = M[live], v[live]
    return np.vstack([M, -M]), np.concatenate([-v, v])


def build_cr_unique_degenerate(lp: StandardFormLP, part: IndexPartition,
                               R: HPolyhedron) -> CriticalRegion:
    """Overdetermined-basis region via the left pseudoinverse; the dual
    particular part is the minimum-norm equality dual and the stored
    bound-dual vector is its zero-null-component instantiation."""
    A = lp.dense_A()
    A1 = A[:, part.j1]
    F = lp.F.toarray()
    try:
        sol1 = left_pinv_solve(A1, np.column_stack([lp.w, F]))
        lam_p = min_norm_dual(A1, lp.c[part.j1])
    except RankDeficientError as exc:
        raise MisclassificationError(
            f"nonzero columns lost rank ({exc})") from exc
    e1, E1 = sol1[:, 0], sol1[:, 1:]
    A0 = A[:, part.j0]
    mu0 = -lp.c[part.j0] - A0.T @ lam_p
    Z = nullspace_basis(A1.T).columns
    E, e = _scatter_primal(lp, part.j1, E1, e1)
    res_M, res_t = _residual_rows(lp, A1, E1, e1)
    region = remove_redundant(
        R.intersect(HPolyhedron(np.vstack([-E1, res_M]),
                                np.concatenate([e1, res_t]))))
    q = lp.q
    return CriticalRegion(
        id=-1, region=region, case=CASE_UNIQUE_D, partition=part,
        E=E, e=e, lam_E=np.zeros((lp.m, q)), lam_e=lam_p,
        mu_E=np.zeros((part.n0, q)), mu_e=mu0, mu_index=list(part.j0),
        Z=Z, active_set=tuple(part.j0), mode_key=tuple(part.j0),
        resolution="", probe=None)


# ---------------------------------------------------------------------------
# multiplicity resolution

def resolve_multiplicity_lex(lp, theta, costs, *, in_standard_form=False):
    """Vertex of the hierarchical LP; its support is then treated as a
    unique (possibly degenerate) solution downstream."""
    vertex = lexicographic_solve(lp, costs, theta,
                                 costs_in_standard_form=in_standard_form)
    j1 = _support(vertex.x)
    return vertex, IndexPartition(
        j1=j1, j0=[j for j in range(lp.n) if j not in set(j1)], n=lp.n)


def equivalent_cost_vector(lp: StandardFormLP, theta, sol: VertexSolution,
                           *, U=1e6, rng=None, attempts=5):
    """Single auxiliary cost whose LP over the optimal face has a unique
    optimum for almost every draw.

    The dual feasible set {G'lam <= d} is boxed at U; the near-center map
    lam_c(d) = (G'G'')^{-1} G' d' turns nonemptiness into a cone of
    desirable directions (G'Q - I) d <= 0, sampled around its Chebyshev
    center with an amplitude small enough to stay strictly inside.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    A = lp.dense_A()
    n = lp.n
    G = np.vstack([A, -lp.c])
    mp1 = G.shape[0]
    # Screen the added box rows: drop the ones redundant against the
    # homogeneous cone and the remaining boxes (scale-invariant in U).
    rows = np.vstack([G.T, np.eye(mp1), -np.eye(mp1)])
    rhs = np.concatenate([np.zeros(n), np.ones(2 * mp1)])
    keep = list(range(rows.shape[0]))
    for i in range(n, rows.shape[0]):
        others = [r for r in keep if r != i]
        status, _, value = ineq_lp(rows[others], rhs[others], rows[i])
        if status == "optimal" and value <= rhs[i] + 1e-9:
            keep.remove(i)
    box_signs = [(1.0 if i < n + mp1 else -1.0, (i - n) % mp1)
                 for i in keep if i >= n]
    L = np.zeros((mp1, len(box_signs)))
    for k, (sgn, coord) in enumerate(box_signs):
        L[coord, k] = sgn
    Gp = np.hstack([G, L])
    QW = np.linalg.pinv(Gp @ Gp.T) @ Gp
    Q = QW[:, :n]
    cone = G.T @ Q - np.eye(n)
    # The cone is homogeneous, so its Chebyshev data inside the U-box is
    # exactly U times the data inside the unit box; computing at unit
    # scale keeps the LP well-conditioned.
    box = HPolyhedron.from_box(-np.ones(n), np.ones(n))
    cone_poly = HPolyhedron(cone, np.zeros(n)).intersect(box)
    d_c, r_c = chebyshev_center_region(cone_poly)
    if d_c is None or r_c <= 1e-12:
        raise EquivalentCostError("desirable-direction cone is degenerate")
    d_c, r_c = U * d_c, U * r_c
    amp = max(r_c / U, min(1e-3 * np.abs(d_c).max(initial=0.0),
                           r_c / (2.0 * np.sqrt(n))))
    b = lp.rhs(theta)
    w_aux = np.append(b, -sol.z)
    n_orig = lp.n_original
    for _ in range(attempts):
        d = d_c + amp * rng.uniform(-1.0, 1.0, n)
        if np.max(cone @ d, initial=0.0) > 1e-8:
            continue
        aux = StandardFormLP(
            G, w_aux, None, -d, check_conditioning=False,
            recovery_R=lp.recovery_R, recovery_r=np.zeros(n_orig),
            recovery_T=np.zeros((n_orig, 0)))
        sol_aux = solve_lp(aux, [])
        if sol_aux.status != "optimal":
            continue
        if multiplicity_check(aux, sol_aux, []) == "unique":
            return d
    raise EquivalentCostError(
        f"no equivalent cost vector after {attempts} draws")


def resolve_multiplicity_qp(lp: StandardFormLP, face, part: IndexPartition,
                            theta, start: VertexSolution):
    """Norm-minimizing point of the optimal face, measured on the original
    variables, with its support refining the partition to two levels.

    Flat directions of the squared-norm objective (split-variable rays and
    the like) are regularized by their own projector, which selects the
    canonical minimal representative without changing the original-space
    minimizer.
    """
    j1 = part.j1
    A = lp.dense_A()
    A1 = A[:, j1]
    R1 = lp.recovery_R.toarray()[:, j1]
    flat = nullspace_basis(np.vstack([R1, A1]))
    Qp = R1.T @ R1
    if flat.dim:
        Qp = Qp + flat.columns @ flat.columns.T
    b = lp.rhs(theta)
    x = start.x[j1].copy()
    x[x < 0] = 0.0
    scale = max(1.0, float(np.abs(x).max(initial=0.0)),
                float(np.abs(b).max(initial=0.0)))
    n1 = len(j1)
    working = {k for k in range(n1) if x[k] <= 1e-9 * scale}
    for _ in range(60 * (n1 + 1)):
        free = [k for k in range(n1) if k not in working]
        Af = A1[:, free]
        nf = len(free)
        K = np.zeros((nf + lp.m, nf + lp.m))
        K[:nf, :nf] = Qp[np.ix_(free, free)]
        K[:nf, nf:] = -Af.T
        K[nf:, :nf] = Af
        rhs = np.concatenate([np.zeros(nf), b])
        sol_k, *_ = np.linalg.lstsq(K, rhs, rcond=None)
        x_hat = np.zeros(n1)
        x_hat[free] = sol_k[:nf]
        d = x_hat - x
        if np.abs(d).max(initial=0.0) <= 1e-10 * scale:
            lam, *_ = np.linalg.lstsq(Af.T, (Qp @ x)[free], rcond=None)
            w_idx = sorted(working)
            mu_w = (Qp @ x)[w_idx] - A1[:, w_idx].T @ lam
            if mu_w.size == 0 or mu_w.min() >= -1e-9 * scale:
                break
            working.discard(w_idx[int(np.argmin(mu_w))])
            continue
        alpha, blocker = 1.0, None
        for k in free:
            if d[k] < -1e-12 * scale:
                ratio = -x[k] / d[k]
                if ratio < alpha - 1e-14:
                    alpha, blocker = ratio, k
        x = x + alpha * d
        x[x < 0] = 0.0
        if blocker is not None:
            working.add(blocker)
    else:
        raise IterationLimitError("face QP active-set loop did not converge")
    if np.max(np.abs(A1 @ x - b), initial=0.0) > TAU_FEAS * scale * 10:
        raise MisclassificationError("face QP point lost feasibility")
    tz = tau_zero(x)
    j11 = [j1[k] for k in range(n1) if x[k] > tz]
    j10 = [j1[k] for k in range(n1) if x[k] <= tz]
    refined = IndexPartition(j1=part.j1, j0=part.j0, n=part.n,
                             j11=j11, j10=j10)
    point = np.zeros(lp.n)
    point[j1] = x
    return point, refined, Qp


# ---------------------------------------------------------------------------
# critical-region builders (QP cases)

def _default_face_hessian(lp, part):
    """Flat-regularized squared-norm Hessian over j1, as the QP resolver
    builds it; exposed so the builders can be used standalone."""
    j1 = part.j1
    R1 = lp.recovery_R.toarray()[:, j1]
    A1 = lp.dense_A()[:, j1]
    flat = nullspace_basis(np.vstack([R1, A1]))
    Qp = R1.T @ R1
    if flat.dim:
        Qp = Qp + flat.columns @ flat.columns.T
    return Qp


def _build_cr_multiple(lp, refined, Qp, R):
    """Shared construction for both second-level cases.

    The primal map is the saddle solve of the face QP restricted to the
    refined support (unique as long as the Hessian is positive on the
    support's kernel, which the flat regularizer guarantees); the dual
    map keeps a null-space component whenever the support rows are
    dependent, lifting the region over (theta, lam_z) before projection.
    """
    A = lp.dense_A()
    pos = {j: k for k, j in enumerate(refined.j1)}
    p11 = [pos[j] for j in refined.j11]
    p10 = [pos[j] for j in refined.j10]
    A11 = A[:, refined.j11]
    A10 = A[:, refined.j10]
    Q11 = Qp[np.ix_(p11, p11)]
    Q10 = Qp[np.ix_(p10, p11)]
    m, n11 = A11.shape
    K = np.zeros((n11 + m, n11 + m))
    K[:n11, :n11] = Q11
    K[:n11, n11:] = -A11.T
    K[n11:, :n11] = A11
    F = lp.F.toarray()
    rhs = np.vstack([np.zeros((n11, 1 + lp.q)),
                     np.column_stack([lp.w, F])])
    sol = None
    if np.linalg.matrix_rank(A11, tol=1e-9 * max(1.0, float(np.abs(A11).max(initial=0.0)))) == m:
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            sol = None
    if sol is None:
        # Dependent support rows leave the dual block singular; the primal
        # block of the minimum-norm saddle solution is still the unique
        # QP map, and the dual particular part is its minimum-norm dual.
        sol = np.linalg.pinv(K) @ rhs
    e1, E1 = sol[:n11, 0], sol[:n11, 1:]
    lam_e, lam_E = sol[n11:, 0], sol[n11:, 1:]
    mu_E = Q10 @ E1 - A10.T @ lam_E
    mu_e = Q10 @ e1 - A10.T @ lam_e
    E, e = _scatter_primal(lp, refined.j11, E1, e1)
    res_M, res_t = _residual_rows(lp, A11, E1, e1)
    Zc = nullspace_basis(A11.T).columns
    k = Zc.shape[1]
    if k == 0:
        rows = HPolyhedron(np.vstack([-E1, res_M, -mu_E]),
                           np.concatenate([e1, res_t, mu_e]))
        region = remove_redundant(R.intersect(rows))
    else:
        # Lifted representation over (theta, lam_z): primal and residual
        # rows are lam_z-free; bound-dual rows couple through -A10' Zc.
        M_R, t_R = R.rows()
        lifted_rows = np.vstack([
            np.hstack([M_R, np.zeros((M_R.shape[0], k))]),
            np.hstack([-E1, np.zeros((n11, k))]),
            np.hstack([res_M, np.zeros((res_M.shape[0], k))]),
            np.hstack([-mu_E, A10.T @ Zc]),
        ])
        lifted_rhs = np.concatenate([t_R, e1, res_t, mu_e])
        region = project_polyhedron(HPolyhedron(lifted_rows, lifted_rhs),
                                    lp.q)
        region = remove_redundant(region)
    case = CASE_MULTIPLE_ND if n11 >= m else CASE_MULTIPLE_D
    return CriticalRegion(
        id=-1, region=region, case=case, partition=refined,
        E=E, e=e, lam_E=lam_E, lam_e=lam_e,
        mu_E=mu_E, mu_e=mu_e, mu_index=list(refined.j10),
        Z=Zc, active_set=tuple(refined.j0),
        mode_key=tuple(sorted(set(refined.j0) | set(refined.j10))),
        resolution="", probe=None)


def build_cr_multiple_nondegenerate(lp: StandardFormLP,
                                    refined: IndexPartition,
                                    R: HPolyhedron,
                                    Qp=None) -> CriticalRegion:
    """Region of the norm-minimizing solution when its support spans the
    rows: both the primal map and the theta-dependent bound duals bound
    the region.  With native nonnegative variables the saddle solve
    reduces exactly to the right-pseudoinverse formulas."""
    if refined.n11 < lp.m:
        raise MisclassificationError(
            f"nondegenerate QP builder needs n11 >= m "
            f"({refined.n11} < {lp.m})")
    if Qp is None:
        Qp = _default_face_hessian(lp, refined)
    return _build_cr_multiple(lp, refined, Qp, R)


def build_cr_multiple_degenerate(lp: StandardFormLP,
                                 refined: IndexPartition,
                                 R: HPolyhedron,
                                 Qp=None) -> CriticalRegion:
    """Degenerate norm-minimizing support (fewer support variables than
    rows): the equality duals keep a free null-space component, so the
    region is the projection of a lifted polyhedron over (theta, lam_z)."""
    if refined.n11 >= lp.m:
        raise MisclassificationError(
            f"degenerate QP builder needs n11 < m ({refined.n11} >= {lp.m})")
    if Qp is None:
        Qp = _default_face_hessian(lp, refined)
    return _build_cr_multiple(lp, refined, Qp, R)


# ---------------------------------------------------------------------------
# remainder splitting (search Strategy I)

def split_remainder(R: HPolyhedron, omega: HPolyhedron, tau_radius):
    """Sub-regions of R covering R minus the region's interior: piece i
    keeps rows 1..i-1 of omega and reverses row i (closed facets both
    sides).  Pieces with Chebyshev radius below tau_radius are dropped."""
    M, t = omega.rows()
    M_R, t_R = R.rows()
    out = []
    for i in range(M.shape[0]):
        rows = np.vstack([M_R, M[:i], -M[i][None, :]])
        rhs = np.concatenate([t_R, t[:i], [-t[i]]])
        sub = HPolyhedron(rows, rhs)
        center, radius = chebyshev_center_region(sub)
        if center is not None and radius > tau_radius:
            out.append(sub)
    return out


# ---------------------------------------------------------------------------
# the partition loop

def _probe_candidates(center, radius, q, extra=4):
    """The Chebyshev center plus up to ``extra`` deterministic in-ball
    perturbations, used when the center lands on a boundary."""
    pts = [np.asarray(center, dtype=float)]
    step = 0.5 * radius
    k = 0
    while len(pts) < 1 + extra:
        axis = (k // 2) % q
        sign = 1.0 if k % 2 == 0 else -1.0
        delta = np.zeros(q)
        delta[axis] = sign * step
        pts.append(pts[0] + delta)
        k += 1
        if k >= 2 * q:
            step *= 0.5
            k = 0
        if step < 1e-12 * max(1.0, radius):
            break
    return pts


def _original_active(lp, zero_set):
    """Original-constraint labels whose marker column is in the zero set."""
    zs = set(zero_set)
    out = []
    for oc in lp.original_constraints:
        if oc.marker_col is not None and oc.marker_col in zs:
            out.append((oc.kind, oc.index))
    return tuple(sorted(out))


class _Engine:
    def __init__(self, lp, config):
        self.lp = lp
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.eq_cost = None

    def _resolved_vertex(self, theta, sol):
        cfg = self.config
        if cfg.resolution == "none":
            j1 = _support(sol.x)
            return sol, IndexPartition(
                j1=j1, j0=[j for j in range(self.lp.n) if j not in set(j1)],
                n=self.lp.n)
        if cfg.resolution == "lex":
            return resolve_multiplicity_lex(self.lp, theta, cfg.lex_costs)
        if cfg.resolution == "eqcost":
            if self.eq_cost is None:
                self.eq_cost = equivalent_cost_vector(
                    self.lp, theta, sol, U=cfg.U, rng=self.rng)
            return resolve_multiplicity_lex(
                self.lp, theta, [-self.eq_cost], in_standard_form=True)
        raise ValueError(cfg.resolution)

    def build_region(self, theta, sol, R: HPolyhedron) -> CriticalRegion:
        """Classify at theta and construct the critical region."""
        lp = self.lp
        case, part, face = classify(lp, theta, sol)
        if case in (CASE_UNIQUE_ND, CASE_UNIQUE_D):
            builder = build_cr_unique_nondegenerate if case == CASE_UNIQUE_ND \
                else build_cr_unique_degenerate
            cr = builder(lp, part, R)
            cr.mode_key = tuple(part.j0)
        elif self.config.resolution == "qp":
            point, refined, Qp = resolve_multiplicity_qp(lp, face, part,
                                                         theta, sol)
            if refined.n11 >= lp.m:
                cr = build_cr_multiple_nondegenerate(lp, refined, R, Qp)
            else:
                cr = build_cr_multiple_degenerate(lp, refined, R, Qp)
            cr.mode_key = tuple(sorted(set(refined.j0) | set(refined.j10)))
        else:
            # Linear resolutions pick a vertex and treat it as unique; the
            # merged counting still follows the face-level active set for
            # the unresolved configuration.
            vertex, vpart = self._resolved_vertex(theta, sol)
            if vpart.n1 == lp.m:
                cr = build_cr_unique_nondegenerate(lp, vpart, R)
            else:
                cr = build_cr_unique_degenerate(lp, vpart, R)
            cr.case = CASE_MULTIPLE_ND if part.n1 >= lp.m else CASE_MULTIPLE_D
            cr.mode_key = tuple(part.j0) if self.config.resolution == "none" \
                else tuple(vpart.j0)
        cr.active_set = tuple(part.j0)
        cr.active_original = _original_active(lp, part.j0)
        cr.resolution = self.config.resolution
        cr.probe = np.asarray(theta, dtype=float)
        return cr

    def _map_optimal_at(self, cr, theta):
        lp = self.lp
        x = cr.primal(theta)
        b = lp.rhs(theta)
        scale = max(1.0, float(np.abs(b).max(initial=0.0)))
        if np.min(x, initial=0.0) < -1e-7 * scale:
            return False
        if np.max(np.abs(lp.dense_A() @ x - b), initial=0.0) > 1e-6 * scale:
            return False
        ref = solve_lp(lp, theta)
        if ref.status != "optimal":
            return False
        return abs(float(lp.c @ x) - ref.z) <= \
            max(TAU_OBJ, 1e-6 * max(1.0, abs(ref.z)))

    def validate(self, cr: CriticalRegion, tau_radius):
        """A region is accepted when it has interior, contains its probe,
        and its map is feasible and optimal at the region's Chebyshev
        center and at in-ball perturbations of it.  A probe sitting on a
        lower-dimensional boundary produces a map that fails off that
        locus, which the perturbed checkpoints expose."""
        center, radius = chebyshev_center_region(cr.region)
        if center is None or radius < tau_radius:
            return False
        if not cr.region.contains(cr.probe, tol=1e-7):
            return False
        for theta in _probe_candidates(center, radius, cr.region.dim):
            if not self._map_optimal_at(cr, theta):
                return False
        return True


def partition(lp: StandardFormLP, R1: HPolyhedron,
              config: RunConfig = None) -> Partition:
    """Cover the search region with critical regions by recursive probing:
    solve at the region's Chebyshev center, build the critical region for
    the classified case, split the remainder into one sub-region per
    facet, and continue until the work list empties."""
    config = config or RunConfig()
    engine = _Engine(lp, config)
    result = Partition(problem_hash=problem_fingerprint(lp), config=config)
    # diameter of R1 via its bounding box
    lo, hi = bounding_box(R1)
    diam = float(np.max(hi - lo, initial=1.0))
    tau_radius = 1e-7 * max(diam, 1e-9)
    stack = [R1]
    next_id = 0
    while stack:
        if result.pops >= config.pop_cap:
            result.complete = False
            result.unresolved.extend(stack)
            break
        R = stack.pop()
        result.pops += 1
        center, radius = chebyshev_center_region(R)
        if center is None or radius < tau_radius:
            continue
        sol = solve_lp(lp, center)
        probes = _probe_candidates(center, radius, R.dim)
        if sol.status == "infeasible":
            feasible_at = None
            for p in probes[1:]:
                trial = solve_lp(lp, p)
                if trial.status == "optimal":
                    feasible_at, sol = p, trial
                    break
                if trial.status == "unbounded":
                    raise UnboundedError("LP unbounded inside search region")
            if feasible_at is None:
                result.infeasible.append(R)
                continue
            probes = [feasible_at] + [p for p in probes if
                                       not np.array_equal(p, feasible_at)]
        elif sol.status == "unbounded":
            raise UnboundedError("LP unbounded inside search region")

        accepted = None
        for p in probes:
            trial = sol if np.array_equal(p, probes[0]) else solve_lp(lp, p)
            if trial.status != "optimal":
                continue
            try:
                cr = engine.build_region(p, trial, R)
            except (ProjectionOverflowError, MisclassificationError,
                    RankDeficientError, IllConditionedError,
                    InfeasibleError, IterationLimitError):
                continue
            if cr.region.empty:
                continue
            if engine.validate(cr, tau_radius):
                accepted = cr
                break
        if accepted is None:
            # Covers both genuine resolution failures and projection
            # overflow; the region is reported for manual follow-up.
            result.unresolved.append(R)
            continue
        accepted.id = next_id
        next_id += 1
        result.regions.append(accepted)
        stack.extend(split_remainder(R, accepted.region, tau_radius))
    result.eq_cost = engine.eq_cost
    return result


def bounding_box(p: HPolyhedron):
    """Per-axis extent of a polyhedron via 2q support LPs."""
    M, t = p.rows()
    q = p.dim
    lo = np.full(q, -np.inf)
    hi = np.full(q, np.inf)
    for j in range(q):
        e = np.zeros(q)
        e[j] = 1.0
        status, _, value = ineq_lp(M, t, e)
        if status == "optimal":
            hi[j] = value
        status, _, value = ineq_lp(M, t, -e)
        if status == "optimal":
            lo[j] = -value
    return lo, hi
