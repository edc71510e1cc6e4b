"""Parametric LP representation and solving.

A general-form problem (mixed inequalities/equalities, free or bounded
variables, parameter-linked right-hand sides and bounds) is converted to the
standard form

    max  c'x   s.t.   A x = w + F theta,   x >= 0

with an exact affine recovery map back to the original variables.  The
solver is a dense revised simplex producing vertex solutions with duals; on
top of it sit lexicographic solving and the single-auxiliary-LP multiplicity
test.

Sign conventions: the engine minimizes the negated cost internally; duals
are reported so that  c + A'lam + mu = 0  with mu >= 0 holds exactly for the
stored (maximization) cost, i.e. lam is the dual of the internal
minimization and mu its reduced-cost vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    FormatError,
    IllConditionedError,
    IllPosedError,
    IterationLimitError,
    UnboundedError,
)
from .sparsela import SparseMatrix, check_full_column_rank
from .tolerances import TAU_DUAL, TAU_OBJ, tau_zero

# Simplex pivot tolerances.
_PIV_TOL = 1e-9
_RATIO_TOL = 1e-9
_REFACTOR_EVERY = 100


@dataclass
class Bound:
    """Per-variable bound: constant part plus optional parameter link
    ``value(theta) = const + scale * theta[index]``."""
    const: float | None = None
    param_index: int | None = None
    param_scale: float = 0.0

    @property
    def is_set(self):
        return self.const is not None

    def value(self, theta):
        v = self.const
        if self.param_index is not None:
            v = v + self.param_scale * theta[self.param_index]
        return v


@dataclass
class GeneralLP:
    """General-form parametric LP over original variables.

    Inequality rows read  a'x <= w + f'theta; equality rows analogously.
    ``bounds`` holds a (lower, upper) pair of Bound per variable; a variable
    with no bounds is free.
    """
    sense: str
    c: np.ndarray
    ineq_A: np.ndarray
    ineq_w: np.ndarray
    ineq_F: np.ndarray
    eq_A: np.ndarray
    eq_w: np.ndarray
    eq_F: np.ndarray
    bounds: list[tuple[Bound, Bound]]
    q: int

    def __post_init__(self):
        if self.sense not in ("max", "min"):
            raise FormatError(f"sense must be max or min, got {self.sense!r}")
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.ineq_A = np.atleast_2d(np.asarray(self.ineq_A, dtype=float)) \
            if np.size(self.ineq_A) else np.zeros((0, n))
        self.eq_A = np.atleast_2d(np.asarray(self.eq_A, dtype=float)) \
            if np.size(self.eq_A) else np.zeros((0, n))
        self.ineq_w = np.asarray(self.ineq_w, dtype=float).ravel()
        self.eq_w = np.asarray(self.eq_w, dtype=float).ravel()
        self.ineq_F = np.asarray(self.ineq_F, dtype=float).reshape(
            self.ineq_A.shape[0], self.q) if np.size(self.ineq_F) else \
            np.zeros((self.ineq_A.shape[0], self.q))
        self.eq_F = np.asarray(self.eq_F, dtype=float).reshape(
            self.eq_A.shape[0], self.q) if np.size(self.eq_F) else \
            np.zeros((self.eq_A.shape[0], self.q))
        if self.ineq_A.shape != (self.ineq_w.size, n):
            raise FormatError("inequality block dimensions inconsistent")
        if self.eq_A.shape != (self.eq_w.size, n):
            raise FormatError("equality block dimensions inconsistent")
        if len(self.bounds) != n:
            raise FormatError("one (lower, upper) bound pair per variable "
                              f"required: {len(self.bounds)} != {n}")
        for lo, hi in self.bounds:
            for b in (lo, hi):
                if b.param_index is not None and not (
                        0 <= b.param_index < self.q):
                    raise FormatError("bound parameter index out of range")

    @property
    def n_vars(self):
        return self.c.size


def free_bounds(n):
    return [(Bound(), Bound()) for _ in range(n)]


@dataclass
class OriginalConstraint:
    """Tightness bookkeeping for one constraint of the general form.

    ``kind`` is one of "ineq", "eq", "lb", "ub", "fixed"; ``marker_col`` is
    the standard-form column whose vanishing signals tightness (None when
    the constraint holds with equality everywhere).
    """
    kind: str
    index: int          # row index for ineq/eq, variable index for bounds
    marker_col: int | None


class StandardFormLP:
    """Standard-form parametric LP  max c'x, A x = w + F theta, x >= 0.

    Carries the exact affine recovery map
        x_original = R x + r + T theta
    and the objective offsets (z_general = sign * c'x + o0 + otheta'theta).
    Construction checks the well-conditioning requirement that [A' c] has
    full column rank, and m <= n.
    """

    def __init__(self, A, w, F, c, *, recovery_R=None, recovery_r=None,
                 recovery_T=None, sense="max", obj_const=0.0, obj_theta=None,
                 original_constraints=None, column_origin=None,
                 check_conditioning=True):
        self.A = A if isinstance(A, SparseMatrix) else SparseMatrix.from_dense(A)
        m, n = self.A.shape
        self.w = np.asarray(w, dtype=float).ravel()
        self.F = F if isinstance(F, SparseMatrix) else SparseMatrix.from_dense(
            np.zeros((m, 0)) if F is None else F)
        self.c = np.asarray(c, dtype=float).ravel()
        self.q = self.F.shape[1]
        if self.w.size != m or self.c.size != n or self.F.shape[0] != m:
            raise FormatError("standard-form dimensions inconsistent")
        if m > n:
            raise IllConditionedError(
                f"more equality rows than variables (m={m} > n={n})")
        if recovery_R is None:
            recovery_R = SparseMatrix.from_dense(np.eye(n))
            recovery_r = np.zeros(n)
            recovery_T = SparseMatrix.from_dense(np.zeros((n, self.q)))
        self.recovery_R = recovery_R if isinstance(recovery_R, SparseMatrix) \
            else SparseMatrix.from_dense(recovery_R)
        self.recovery_r = np.asarray(recovery_r, dtype=float).ravel()
        self.recovery_T = recovery_T if isinstance(recovery_T, SparseMatrix) \
            else SparseMatrix.from_dense(recovery_T)
        self.sense = sense
        self.obj_const = float(obj_const)
        self.obj_theta = np.zeros(self.q) if obj_theta is None else \
            np.asarray(obj_theta, dtype=float).ravel()
        self.original_constraints = original_constraints or []
        self.column_origin = column_origin
        self._dense_A = None
        if check_conditioning and m < n:
            # Well-conditioning: the cost must not lie in the row space of
            # A, else the objective is constant on the feasible set and the
            # region machinery degenerates.  Row dependence itself is left
            # to the solver (dependent-but-consistent rows are droppable,
            # inconsistent ones must surface as infeasibility) and to the
            # face builder, which rejects singular GG'.  For m = n the
            # feasible set is at most a point and no check applies.
            Ad = self.A.toarray()
            rank_a = np.linalg.matrix_rank(Ad, tol=None)
            rank_ac = np.linalg.matrix_rank(np.vstack([Ad, self.c]),
                                            tol=None)
            if rank_ac == rank_a:
                raise IllConditionedError(
                    "[A' c] is column-rank deficient: the cost lies in "
                    "the row space of the constraints")

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def n(self):
        return self.A.shape[1]

    @property
    def n_original(self):
        return self.recovery_R.shape[0]

    def dense_A(self):
        if self._dense_A is None:
            self._dense_A = self.A.toarray()
        return self._dense_A

    def rhs(self, theta):
        """w + F theta."""
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != self.q:
            raise FormatError(f"theta has size {theta.size}, expected {self.q}")
        return self.w + self.F.matvec(theta)

    def recover(self, x, theta):
        """Map a standard-form point back to original variables."""
        return (self.recovery_R.matvec(x) + self.recovery_r
                + self.recovery_T.matvec(np.asarray(theta, dtype=float)))

    def general_objective(self, z_standard, theta):
        """Translate a standard-form objective value to the general form."""
        theta = np.asarray(theta, dtype=float).ravel()
        sign = 1.0 if self.sense == "max" else -1.0
        return sign * z_standard + self.obj_const + self.obj_theta @ theta


@dataclass
class VertexSolution:
    """Vertex solution with duals.

    When optimal:  A x = w + F theta (tau_feas), x >= -tau_feas,
    c + A'lam + mu = 0 (tau_dual) for the stored maximization cost,
    mu >= -tau_dual, and x_j mu_j <= tau_comp.
    """
    status: str
    x: np.ndarray | None = None
    basis: tuple = ()
    lam: np.ndarray | None = None
    mu: np.ndarray | None = None
    z: float | None = None


@dataclass
class DegeneracyInfo:
    """Degeneracy degree sigma = bnd + dim - n of a face."""
    bnd: int
    dim: int
    sigma: int

    @property
    def degenerate(self):
        return self.sigma > 0


def degeneracy_degree(bnd, dim, n):
    if not 0 <= dim <= n:
        raise FormatError(f"face dimension {dim} outside [0, {n}]")
    return DegeneracyInfo(bnd=bnd, dim=dim, sigma=bnd + dim - n)


# ---------------------------------------------------------------------------
# General form -> standard form

def to_standard_form(g: GeneralLP) -> StandardFormLP:
    """Standardize: slacks for inequalities, shifts/negations/splits for
    bounds, parameter-linked bounds folded into (w, F), recovery map exact.

    Bound handling per variable:
      fixed (lo == hi, constant)  -> substituted out
      finite lower only           -> shift    x = t + lo(theta)
      finite lower and upper      -> shift plus one slack row
      finite upper only           -> negate   x = hi(theta) - t
      free                        -> split    x = t+ - t-
    """
    n = g.n_vars
    q = g.q
    n_ineq = g.ineq_A.shape[0]
    n_eq = g.eq_A.shape[0]

    # Column bookkeeping for each original variable.
    col_of = []           # per variable: list of std columns
    col_sign = []         # matching signs in the recovery combination
    var_shift_c = np.zeros(n)
    var_shift_T = np.zeros((n, q))
    fixed_value = [None] * n
    bound_rows = []       # (var, w, Frow) extra rows for two-sided bounds
    bound_row_var = []
    col_origin = []
    next_col = 0
    lb_marker = {}
    ub_marker = {}

    for j, (lo, hi) in enumerate(g.bounds):
        lo_c = lo.const if lo.is_set else None
        hi_c = hi.const if hi.is_set else None
        if lo.is_set and hi.is_set and lo.param_index is None \
                and hi.param_index is None and lo_c == hi_c:
            fixed_value[j] = lo_c
            col_of.append([])
            col_sign.append([])
            var_shift_c[j] = lo_c
            continue
        if lo.is_set:
            # x = t + lo(theta), t >= 0
            col_of.append([next_col])
            col_sign.append([1.0])
            var_shift_c[j] = lo_c
            if lo.param_index is not None:
                var_shift_T[j, lo.param_index] = lo.param_scale
            lb_marker[j] = next_col
            col_origin.append(("var", j, "shift"))
            next_col += 1
            if hi.is_set:
                # extra row t <= hi(theta) - lo(theta), slack added later
                wrow = hi_c - lo_c
                frow = np.zeros(q)
                if hi.param_index is not None:
                    frow[hi.param_index] += hi.param_scale
                if lo.param_index is not None:
                    frow[lo.param_index] -= lo.param_scale
                bound_rows.append((j, wrow, frow))
                bound_row_var.append(j)
        elif hi.is_set:
            # x = hi(theta) - t, t >= 0
            col_of.append([next_col])
            col_sign.append([-1.0])
            var_shift_c[j] = hi_c
            if hi.param_index is not None:
                var_shift_T[j, hi.param_index] = hi.param_scale
            ub_marker[j] = next_col
            col_origin.append(("var", j, "negshift"))
            next_col += 1
        else:
            col_of.append([next_col, next_col + 1])
            col_sign.append([1.0, -1.0])
            col_origin.append(("var", j, "pos"))
            col_origin.append(("var", j, "neg"))
            next_col += 2

    n_var_cols = next_col
    n_bound_rows = len(bound_rows)
    m = n_ineq + n_eq + n_bound_rows
    n_slacks = n_ineq + n_bound_rows
    n_std = n_var_cols + n_slacks

    A = np.zeros((m, n_std))
    w = np.zeros(m)
    Fm = np.zeros((m, q))

    def emit_row(r, coeffs, wval, frow):
        w[r] = wval
        Fm[r, :] = frow
        for j in range(n):
            a = coeffs[j]
            if a == 0.0:
                continue
            if fixed_value[j] is not None:
                w[r] -= a * fixed_value[j]
                continue
            # substitute x_j = sign * t + shift_c + shift_T theta
            w[r] -= a * var_shift_c[j]
            Fm[r, :] -= a * var_shift_T[j]
            for col, s in zip(col_of[j], col_sign[j]):
                A[r, col] += a * s

    for i in range(n_ineq):
        emit_row(i, g.ineq_A[i], g.ineq_w[i], g.ineq_F[i])
    for i in range(n_eq):
        emit_row(n_ineq + i, g.eq_A[i], g.eq_w[i], g.eq_F[i])
    for k, (j, wval, frow) in enumerate(bound_rows):
        r = n_ineq + n_eq + k
        w[r] = wval
        Fm[r, :] = frow
        A[r, col_of[j][0]] = 1.0

    # Slack columns: inequality rows then bound rows.
    slack_col_of_ineq = {}
    slack_col_of_bound = {}
    col = n_var_cols
    for i in range(n_ineq):
        A[i, col] = 1.0
        slack_col_of_ineq[i] = col
        col_origin.append(("slack", "ineq", i))
        col += 1
    for k, j in enumerate(bound_row_var):
        A[n_ineq + n_eq + k, col] = 1.0
        slack_col_of_bound[j] = col
        col_origin.append(("slack", "bound", j))
        col += 1

    # Recovery map and objective.
    R = np.zeros((n, n_std))
    r_vec = np.zeros(n)
    T = np.zeros((n, q))
    for j in range(n):
        if fixed_value[j] is not None:
            r_vec[j] = fixed_value[j]
            continue
        r_vec[j] = var_shift_c[j]
        T[j, :] = var_shift_T[j]
        for colj, s in zip(col_of[j], col_sign[j]):
            R[j, colj] = s

    c_std = R.T @ g.c          # maximization cost on standard variables
    obj_const = g.c @ r_vec
    obj_theta = T.T @ g.c
    if g.sense == "min":
        c_std = -c_std

    constraints = []
    for i in range(n_ineq):
        constraints.append(OriginalConstraint("ineq", i,
                                              slack_col_of_ineq[i]))
    for i in range(n_eq):
        constraints.append(OriginalConstraint("eq", i, None))
    for j in range(n):
        if fixed_value[j] is not None:
            constraints.append(OriginalConstraint("fixed", j, None))
            continue
        if j in lb_marker:
            constraints.append(OriginalConstraint("lb", j, lb_marker[j]))
            if j in slack_col_of_bound:
                constraints.append(
                    OriginalConstraint("ub", j, slack_col_of_bound[j]))
        elif j in ub_marker:
            constraints.append(OriginalConstraint("ub", j, ub_marker[j]))

    return StandardFormLP(
        SparseMatrix.from_dense(A), w, SparseMatrix.from_dense(Fm), c_std,
        recovery_R=SparseMatrix.from_dense(R), recovery_r=r_vec,
        recovery_T=SparseMatrix.from_dense(T), sense=g.sense,
        obj_const=obj_const, obj_theta=obj_theta,
        original_constraints=constraints, column_origin=col_origin)


# ---------------------------------------------------------------------------
# Revised simplex

class _Tableau:
    """Mutable revised-simplex state: explicit basis inverse with periodic
    refactorization."""

    def __init__(self, A, b, basis):
        self.A = A
        self.b = b
        self.basis = list(basis)
        self.refactor()

    def refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise IllConditionedError(
                f"singular working basis {self.basis}") from exc
        self.xb = self.Binv @ self.b

    def pivot(self, entering, leaving_pos):
        d = self.Binv @ self.A[:, entering]
        piv = d[leaving_pos]
        eta = -d / piv
        eta[leaving_pos] = 1.0 / piv
        # Product-form update of the inverse.
        row = self.Binv[leaving_pos, :].copy()
        self.Binv += np.outer(eta, row)
        self.Binv[leaving_pos, :] = row / piv
        self.basis[leaving_pos] = entering
        self.xb = self.Binv @ self.b


def _simplex_min(A, b, c, *, max_iter=None):
    """min c'x s.t. Ax=b, x>=0 from scratch (two-phase).

    Returns (status, x, basis, y, kept_rows) where y are equality duals on
    the kept (independent) rows and kept_rows their indices.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if m == 0:
        if np.any(c < -_PIV_TOL):
            return "unbounded", None, [], None, []
        return "optimal", np.zeros(n), [], np.zeros(0), []
    neg = b < 0
    A = A.copy()
    A[neg] *= -1.0
    b[neg] *= -1.0

    # Phase 1: artificial basis.
    art = np.arange(n, n + m)
    A1 = np.hstack([A, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    tab = _Tableau(A1, b, art)
    status = _simplex_loop(tab, c1, max_iter=max_iter)
    if status == "iterations":
        raise IterationLimitError("phase-1 simplex exceeded iteration bound")
    # Feasibility is judged row by row: the residual of row i is the value
    # of its artificial, and must be small relative to that row's own
    # right-hand side.  (An aggregate test would let one huge-rhs row mask
    # an order-one gap elsewhere.)
    x1 = np.zeros(n + m)
    x1[tab.basis] = tab.xb
    resid = np.abs(A @ x1[:n] - b)
    if np.any(resid > 1e-7 * np.maximum(1.0, np.abs(b))):
        return "infeasible", None, [], None, []

    # Drive artificials out of the basis where a structural column can take
    # their place; positions that cannot pivot witness dependent rows.
    for pos in range(m):
        if tab.basis[pos] < n:
            continue
        row = tab.Binv[pos, :] @ A1[:, :n]
        cands = [int(j) for j in np.nonzero(np.abs(row) > 1e-9)[0]
                 if j not in tab.basis]
        if cands:
            tab.pivot(cands[0], pos)
    if any(j >= n for j in tab.basis):
        # Dependent rows remain: restart phase 2 on an independent row
        # subset that keeps the structural basis columns nonsingular.
        basis_cols = [j for j in tab.basis if j < n]
        keep_rows = _independent_row_subset(A, basis_cols)
        A = A[keep_rows]
        b = b[keep_rows]
        tab = _Tableau(A, b, basis_cols)
    else:
        keep_rows = list(range(m))
        tab = _Tableau(A, b, tab.basis)

    status = _simplex_loop(tab, c, max_iter=max_iter)
    if status == "iterations":
        raise IterationLimitError("phase-2 simplex exceeded iteration bound")
    if status == "unbounded":
        return "unbounded", None, [], None, keep_rows
    x = np.zeros(n)
    x[tab.basis] = np.clip(tab.xb, 0.0, None)
    y = tab.Binv.T @ c[tab.basis]
    # Undo the sign flips applied to make b nonnegative.
    y_full = y.copy()
    for pos, i in enumerate(keep_rows):
        if neg[i]:
            y_full[pos] = -y_full[pos]
    return "optimal", x, sorted(tab.basis), y_full, keep_rows


def _independent_row_subset(A, basis_cols):
    """Rows forming a nonsingular square with the given columns."""
    sub = A[:, basis_cols]
    # Greedy row selection by QR on the transpose.
    rows = []
    for i in range(A.shape[0]):
        trial = sub[rows + [i], :]
        if np.linalg.matrix_rank(trial) == len(rows) + 1:
            rows.append(i)
        if len(rows) == len(basis_cols):
            break
    if len(rows) != len(basis_cols):
        raise IllConditionedError("failed to select independent rows")
    return rows


def _simplex_loop(tab, c, *, max_iter=None):
    m, ncols = tab.A.shape
    bland_after = 3 * (m + ncols)
    if max_iter is None:
        max_iter = 200 * (m + ncols) + 10000
    it = 0
    since_refactor = 0
    while True:
        if it >= max_iter:
            return "iterations"
        y = tab.Binv.T @ c[tab.basis]
        reduced = c - tab.A.T @ y
        reduced[tab.basis] = 0.0
        if it < bland_after:
            entering = int(np.argmin(reduced))
            if reduced[entering] >= -_PIV_TOL:
                return "optimal"
        else:
            negs = np.nonzero(reduced < -_PIV_TOL)[0]
            if negs.size == 0:
                return "optimal"
            entering = int(negs[0])
        d = tab.Binv @ tab.A[:, entering]
        pos = np.nonzero(d > _RATIO_TOL)[0]
        if pos.size == 0:
            return "unbounded"
        ratios = np.maximum(tab.xb[pos], 0.0) / d[pos]
        rmin = ratios.min()
        ties = pos[ratios <= rmin + _RATIO_TOL]
        if it < bland_after:
            leaving_pos = int(ties[0])
        else:
            # Bland: leave the tie with the smallest basic variable index.
            leaving_pos = int(min(ties, key=lambda p: tab.basis[p]))
        tab.pivot(entering, leaving_pos)
        it += 1
        since_refactor += 1
        if since_refactor >= _REFACTOR_EVERY:
            tab.refactor()
            since_refactor = 0


def solve_lp(lp: StandardFormLP, theta) -> VertexSolution:
    """Optimal vertex of the standard-form LP at the given parameter.

    Deterministic: Dantzig pricing with lowest-index ties, switching to
    Bland's rule after 3(m+n) iterations.
    """
    b = lp.rhs(theta)
    c_min = -lp.c  # internal minimization of the negated cost
    status, x, basis, y, kept = _simplex_min(lp.dense_A(), b, c_min)
    if status != "optimal":
        return VertexSolution(status=status)
    lam = np.zeros(lp.m)
    lam[np.asarray(kept, dtype=int)] = y
    mu = c_min - lp.dense_A().T @ lam
    z = float(lp.c @ x)
    return VertexSolution(status="optimal", x=x, basis=tuple(basis),
                          lam=lam, mu=mu, z=z)


def kkt_residuals(lp: StandardFormLP, sol: VertexSolution, theta):
    """Maximum-norm residuals of primal feasibility, dual feasibility,
    stationarity and complementarity for an optimal VertexSolution."""
    b = lp.rhs(theta)
    A = lp.dense_A()
    primal = float(np.max(np.abs(A @ sol.x - b), initial=0.0))
    lower = float(max(0.0, -np.min(sol.x, initial=0.0)))
    stat = float(np.max(np.abs(lp.c + A.T @ sol.lam + sol.mu), initial=0.0))
    dual = float(max(0.0, -np.min(sol.mu, initial=0.0)))
    comp = float(np.max(np.abs(sol.x * sol.mu), initial=0.0))
    return {"primal": max(primal, lower), "stationarity": stat,
            "dual": dual, "complementarity": comp}


# ---------------------------------------------------------------------------
# Lexicographic solving and multiplicity

def _solve_with_extra_rows(lp, theta, extra_rows, extra_rhs, c_min):
    A = lp.dense_A()
    if extra_rows:
        A = np.vstack([A] + [np.asarray(r, dtype=float) for r in extra_rows])
        b = np.concatenate([lp.rhs(theta), np.asarray(extra_rhs, dtype=float)])
    else:
        b = lp.rhs(theta)
    return _simplex_min(A, b, c_min)


def standard_costs_from_original(lp: StandardFormLP, costs):
    """Map auxiliary cost vectors on original variables to standard-form
    costs.  Auxiliary objectives are always maximized (the standard form's
    sense), independent of the primary problem's original sense."""
    Rt = lp.recovery_R.toarray().T
    out = []
    for d in costs:
        d = np.asarray(d, dtype=float).ravel()
        if d.size != lp.n_original:
            raise FormatError(
                f"auxiliary cost has size {d.size}, expected {lp.n_original}")
        out.append(Rt @ d)
    return out


def lexicographic_solve(lp: StandardFormLP, auxiliary_costs, theta,
                        *, costs_in_standard_form=False) -> VertexSolution:
    """Hierarchical solve: optimize the primary cost, then each auxiliary
    cost over the previous level's optimizer set.

    Implemented by appending the fixed-value row  c'x = z*  at each level.
    Auxiliary costs are given on original variables unless
    ``costs_in_standard_form``.  Well-posedness requires each auxiliary
    cost to be linearly independent of the rows of A and preceding costs.
    """
    if costs_in_standard_form:
        aux = [np.asarray(d, dtype=float).ravel() for d in auxiliary_costs]
    else:
        aux = standard_costs_from_original(lp, auxiliary_costs)
    base = solve_lp(lp, theta)
    if base.status != "optimal" or not aux:
        return base

    A = lp.dense_A()
    stack = A
    for k, d in enumerate(aux):
        stack = np.vstack([stack, d])
        if not check_full_column_rank(stack.T):
            raise IllPosedError(
                f"auxiliary cost {k} is linearly dependent on the "
                "constraint rows and preceding costs")

    extra_rows, extra_rhs = [], []
    prev_cost_max = lp.c
    prev_z = base.z
    x = base.x
    for k, d in enumerate(aux):
        extra_rows.append(prev_cost_max)
        extra_rhs.append(prev_z)
        status, x, basis, y, kept = _solve_with_extra_rows(
            lp, theta, extra_rows, extra_rhs, -d)
        if status == "unbounded":
            raise UnboundedError(f"auxiliary level {k} is unbounded")
        if status != "optimal":
            raise IllPosedError(
                f"auxiliary level {k} lost feasibility (status {status})")
        prev_cost_max = d
        prev_z = float(d @ x)
    return VertexSolution(status="optimal", x=x, basis=tuple(sorted(basis)),
                          lam=base.lam, mu=base.mu, z=base.z)


def multiplicity_check(lp: StandardFormLP, sol: VertexSolution, theta):
    """"unique" or "multiple", measured on the original variables.

    Screen first with one auxiliary LP over the optimal face: with Z0 the
    zero-valued variables whose reduced cost also vanishes, maximize the
    sum of x_j over Z0 subject to optimality.  A zero optimum certifies a
    zero-dimensional face, hence uniqueness.  Otherwise the face has
    dimension >= 1 in standard coordinates, but split variables contribute
    directions with no original-variable image, so per-coordinate range
    LPs over the face decide whether any original coordinate actually
    moves.
    """
    if sol.status != "optimal":
        raise FormatError("multiplicity_check requires an optimal solution")
    b = lp.rhs(theta)
    tz = tau_zero(b)
    z0 = np.nonzero((sol.x <= tz) & (np.abs(sol.mu) <= TAU_DUAL))[0]
    if z0.size == 0:
        return "unique"
    c_aux = np.zeros(lp.n)
    c_aux[z0] = -1.0  # minimize the negative sum
    status, x, _, _, _ = _solve_with_extra_rows(
        lp, theta, [lp.c], [sol.z], c_aux)
    if status == "optimal" and float(x[z0].sum()) <= tz:
        return "unique"
    if status not in ("optimal", "unbounded"):
        raise IllPosedError(f"multiplicity LP ended with status {status}")

    # Face dimension >= 1 in standard coordinates; test the image.
    R = lp.recovery_R.toarray()
    x_ref = lp.recover(sol.x, theta)
    scale = max(1.0, float(np.max(np.abs(x_ref), initial=0.0)))
    for k in range(lp.n_original):
        row = R[k, :]
        if not row.any():
            continue
        for sign in (1.0, -1.0):
            st, xk, _, _, _ = _solve_with_extra_rows(
                lp, theta, [lp.c], [sol.z], -sign * row)
            if st == "unbounded":
                return "multiple"
            if st != "optimal":
                raise IllPosedError(
                    f"range LP for coordinate {k} ended with status {st}")
            moved = sign * float(row @ xk) - sign * float(row @ sol.x)
            if moved > 1e-7 * scale:
                return "multiple"
    return "unique"
