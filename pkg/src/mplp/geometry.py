"""Polyhedral computations: H-representations, Chebyshev centers, Telgen
redundancy/implicit-row tests, Fourier-Motzkin projection, and optimal-face
construction for the region machinery.

All auxiliary LPs run on the same deterministic simplex as the main solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .errors import (
    IllConditionedError,
    InfeasibleError,
    ProjectionOverflowError,
)
from .lp import _simplex_min
from .sparsela import (
    NullspaceBasis,
    SparseMatrix,
    nullspace_basis,
    right_pinv_solve,
)
from .tolerances import TAU_FEAS, tau_zero

# Fourier-Motzkin intermediate-row cap.
FM_ROW_CAP = 20_000
# Virtual radius bound so Chebyshev LPs stay bounded on unbounded sets.
_RADIUS_CAP = 1e12
# Face box scale: the optimal face is intersected with 0 <= x <= B before
# center/implicit computations so split-variable rays cannot escape.
_FACE_BOX_FACTOR = 1e6


class HPolyhedron:
    """{theta : M theta <= t} with an explicit empty marker.

    Zero rows with ``empty=False`` mean the whole space; the canonical
    empty polyhedron has zero rows and ``empty=True``.
    """

    __slots__ = ("M", "t", "minimal", "empty")

    def __init__(self, M, t, *, minimal=False, empty=False):
        self.M = M if isinstance(M, SparseMatrix) else \
            SparseMatrix.from_dense(np.atleast_2d(np.asarray(M, dtype=float))
                                    if np.size(M) else np.zeros((0, 0)))
        self.t = np.asarray(t, dtype=float).ravel()
        if self.M.shape[0] != self.t.size:
            raise ValueError("row count mismatch in H-representation")
        self.minimal = bool(minimal)
        self.empty = bool(empty)

    @classmethod
    def empty_set(cls, dim):
        return cls(np.zeros((0, dim)), np.zeros(0), minimal=True, empty=True)

    @classmethod
    def from_box(cls, lo, hi):
        lo = np.asarray(lo, dtype=float).ravel()
        hi = np.asarray(hi, dtype=float).ravel()
        d = lo.size
        eye = np.eye(d)
        return cls(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    @property
    def dim(self):
        return self.M.shape[1]

    @property
    def n_rows(self):
        return self.M.shape[0]

    def rows(self):
        return self.M.toarray(), self.t.copy()

    def contains(self, theta, tol=1e-9):
        if self.empty:
            return False
        if self.n_rows == 0:
            return True
        theta = np.asarray(theta, dtype=float)
        return bool(np.max(self.M.matvec(theta) - self.t, initial=0.0)
                    <= tol * max(1.0, float(np.abs(self.t).max(initial=1.0))))

    def intersect(self, other):
        if self.empty or other.empty:
            return HPolyhedron.empty_set(max(self.dim, other.dim))
        if self.n_rows == 0:
            return other
        if other.n_rows == 0:
            return self
        M1, t1 = self.rows()
        M2, t2 = other.rows()
        return HPolyhedron(np.vstack([M1, M2]), np.concatenate([t1, t2]))

    def __repr__(self):
        tag = "empty" if self.empty else f"{self.n_rows}x{self.dim}"
        return f"HPolyhedron({tag})"


# ---------------------------------------------------------------------------
# inequality-form LP helper

def ineq_lp(M, t, c_max):
    """max c'y over {My <= t} with free y.  Returns (status, y, value)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    t = np.asarray(t, dtype=float).ravel()
    c_max = np.asarray(c_max, dtype=float).ravel()
    m, d = M.shape
    if m == 0:
        if np.any(np.abs(c_max) > 1e-12):
            return "unbounded", None, None
        return "optimal", np.zeros(d), 0.0
    A = np.hstack([M, -M, np.eye(m)])
    c_min = np.concatenate([-c_max, c_max, np.zeros(m)])
    status, x, _, _, _ = _simplex_min(A, t, c_min)
    if status != "optimal":
        return status, None, None
    y = x[:d] - x[d:2 * d]
    return "optimal", y, float(c_max @ y)


def chebyshev_center_region(p: HPolyhedron):
    """Largest inscribed-ball center and radius, or (None, None) if empty.

    The radius variable is capped at a large constant so unbounded sets
    still yield a well-defined interior point.
    """
    if p.empty:
        return None, None
    d = p.dim
    if p.n_rows == 0:
        return np.zeros(d), _RADIUS_CAP
    M, t = p.rows()
    norms = np.linalg.norm(M, axis=1)
    live = norms > 1e-14
    if not np.all(live):
        # Zero rows constrain nothing unless their rhs is negative.
        if np.any(t[~live] < -tau_zero(t)):
            return None, None
        M, t, norms = M[live], t[live], norms[live]
        if M.shape[0] == 0:
            return np.zeros(d), _RADIUS_CAP
    # Normalized rows keep the LP well-scaled when rhs magnitudes mix.
    M = M / norms[:, None]
    t = t / norms
    lifted = np.hstack([M, np.ones((M.shape[0], 1))])
    cap = np.append(np.zeros(d), 1.0)
    lifted = np.vstack([lifted, -cap, cap])
    rhs = np.concatenate([t, [0.0, _RADIUS_CAP]])
    status, y, value = ineq_lp(lifted, rhs, cap)
    if status != "optimal":
        return None, None
    return y[:d], float(y[d])


def _feasible(p: HPolyhedron):
    return chebyshev_center_region(p)[0] is not None


def remove_redundant(p: HPolyhedron) -> HPolyhedron:
    """Minimal H-representation via the per-row LP test: maximize each
    row's left-hand side subject to the remaining rows; drop the row iff
    the optimum stays at or below its right-hand side."""
    if p.empty:
        return p
    if p.n_rows == 0:
        return HPolyhedron(p.M, p.t, minimal=True)
    if not _feasible(p):
        return HPolyhedron.empty_set(p.dim)
    M, t = p.rows()
    tz = tau_zero(t)
    keep = list(range(M.shape[0]))
    i = 0
    while i < len(keep):
        row_idx = keep[i]
        others = [r for r in keep if r != row_idx]
        if not others:
            i += 1
            continue
        status, _, value = ineq_lp(M[others], t[others], M[row_idx])
        if status == "optimal" and value <= t[row_idx] + tz:
            keep.pop(i)
        else:
            i += 1
    return HPolyhedron(M[keep], t[keep], minimal=True)


def find_implicit_rows(M, t, *, candidates=None, chebyshev=None):
    """Partition row indices of {y : My <= t} into (explicit, implicit).

    A row is implicit iff its left-hand side attains its bound everywhere
    on the set.  Rows with positive slack at the Chebyshev point are
    explicit without an LP; the remaining candidates each get one LP.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    t = np.asarray(t, dtype=float).ravel()
    m = M.shape[0]
    idx = list(range(m)) if candidates is None else list(candidates)
    tz = tau_zero(t)
    explicit, implicit = [], []
    if chebyshev is None:
        chebyshev, _ = chebyshev_center_region(HPolyhedron(M, t))
    if chebyshev is None:
        raise InfeasibleError("implicit-row split on an empty set")
    slack = t - M @ chebyshev
    for i in idx:
        if slack[i] > tz:
            explicit.append(i)
            continue
        status, _, value = ineq_lp(M, t, -M[i])
        # max of -(M_i y) = -(min M_i y); row implicit iff M_i y = t_i on
        # the whole set, i.e. min M_i y >= t_i - tol.
        if status == "optimal" and -value >= t[i] - tz:
            implicit.append(i)
        else:
            explicit.append(i)
    return explicit, implicit


def project_polyhedron(lifted: HPolyhedron, keep: int) -> HPolyhedron:
    """Project {(theta, lam) : M [theta; lam] <= t} onto the first ``keep``
    coordinates by Fourier-Motzkin elimination, one lifted coordinate at a
    time, pruning redundant rows after each step."""
    if lifted.empty:
        return HPolyhedron.empty_set(keep)
    d = lifted.dim - keep
    if d < 0:
        raise ValueError("keep exceeds polyhedron dimension")
    if d == 0:
        return lifted
    M, t = lifted.rows()
    for _ in range(d):
        M, t = _fm_eliminate_last(M, t)
        if M is None:
            return HPolyhedron.empty_set(keep)
        reduced = remove_redundant(HPolyhedron(M, t))
        if reduced.empty:
            return HPolyhedron.empty_set(keep)
        M, t = reduced.rows()
    return HPolyhedron(M, t, minimal=True)


def _fm_eliminate_last(M, t):
    """One Fourier-Motzkin step on the last coordinate.  Returns (M', t')
    over the remaining coordinates, or (None, None) when a trivially
    infeasible row appears."""
    col = M[:, -1]
    rest = M[:, :-1]
    tz = tau_zero(t)
    pos = np.nonzero(col > 1e-11)[0]
    neg = np.nonzero(col < -1e-11)[0]
    zero = np.nonzero(np.abs(col) <= 1e-11)[0]
    rows = [rest[zero]]
    rhs = [t[zero]]
    n_new = zero.size + pos.size * neg.size
    if n_new > FM_ROW_CAP:
        raise ProjectionOverflowError(
            f"elimination step would create {n_new} rows (cap {FM_ROW_CAP})")
    for i in pos:
        for j in neg:
            a, b = col[i], -col[j]
            new_row = b * rest[i] + a * rest[j]
            new_rhs = b * t[i] + a * t[j]
            scale = np.abs(new_row).max(initial=0.0)
            if scale <= 1e-11 * max(1.0, a * b):
                if new_rhs < -tz * max(1.0, a * b):
                    return None, None
                continue
            rows.append(new_row[None, :] / scale)
            rhs.append([new_rhs / scale])
    M_new = np.vstack(rows) if rows else np.zeros((0, rest.shape[1]))
    t_new = np.concatenate([np.asarray(r, dtype=float).ravel() for r in rhs]) \
        if rhs else np.zeros(0)
    # Drop degenerate all-zero rows left over from the zero block.
    if M_new.shape[0]:
        norms = np.abs(M_new).max(axis=1, initial=0.0) if M_new.shape[1] \
            else np.zeros(M_new.shape[0])
        trivial = norms <= 1e-11
        if np.any(trivial & (t_new < -tz)):
            return None, None
        M_new = M_new[~trivial]
        t_new = t_new[~trivial]
    return M_new, t_new


def linf_distance(p: HPolyhedron, theta):
    """Chebyshev (L-infinity) distance from theta to the polyhedron, with
    the nearest point; (None, None) when empty."""
    if p.empty:
        return None, None
    theta = np.asarray(theta, dtype=float).ravel()
    d = p.dim
    M, t = p.rows() if p.n_rows else (np.zeros((0, d)), np.zeros(0))
    eye = np.eye(d)
    ones = np.ones((d, 1))
    blocks = [np.hstack([M, np.zeros((M.shape[0], 1))]),
              np.hstack([eye, -ones]),
              np.hstack([-eye, -ones]),
              np.append(np.zeros(d), -1.0)[None, :]]
    rhs = np.concatenate([t, theta, -theta, [0.0]])
    c = np.append(np.zeros(d), -1.0)
    status, y, value = ineq_lp(np.vstack(blocks), rhs, c)
    if status != "optimal":
        return None, None
    return float(-value), y[:d]


# ---------------------------------------------------------------------------
# optimal faces

@dataclass
class OptimalFace:
    """The optimal set {x : Gx = v, x >= 0} of a standard-form LP at a
    fixed parameter, reduced to null-space coordinates.

    Points are x(u) = N (aleph u + y_p) + h for u free in the explicit-row
    polyhedron; ``n_free`` is that coordinate dimension and ``n_X`` the
    dimension of the face's image in original variables (split variables
    contribute image-less directions).  Rows beyond ``n_real`` in the
    explicit block come from the bounding box, never from the LP.
    """
    G: np.ndarray
    v: np.ndarray
    N: NullspaceBasis
    h: np.ndarray
    explicit: list
    implicit: list
    N_ex: np.ndarray
    h_ex: np.ndarray
    N_im: np.ndarray
    h_im: np.ndarray
    aleph: NullspaceBasis
    y_p: np.ndarray
    n_X: int
    n_real: int
    image: np.ndarray = field(default=None, repr=False)

    @property
    def n_free(self):
        return self.aleph.dim

    def point_from_u(self, u):
        y = self.aleph.matvec(u) + self.y_p if self.n_free else self.y_p
        return self.N.matvec(y) + self.h

    def center_point(self):
        return self.point_from_u(np.zeros(self.n_free))


def build_optimal_face(lp, theta, z_star) -> OptimalFace:
    """Construct the optimal face of ``lp`` at ``theta`` given the optimal
    value ``z_star`` (in the stored maximization sense).

    G stacks A with the negated cost row; the face is boxed at a large
    multiple of the data scale before the explicit/implicit split so that
    split-variable rays stay polytopal.
    """
    A = lp.dense_A()
    b = lp.rhs(theta)
    G = np.vstack([A, -lp.c])
    v = np.concatenate([b, [-z_star]])
    try:
        h = right_pinv_solve(G, v)
    except Exception as exc:
        raise IllConditionedError(
            "GG' is singular: dependent rows or cost in row space "
            f"({exc})") from exc
    if np.max(np.abs(G @ h - v)) > TAU_FEAS * max(1.0, np.abs(v).max()):
        raise IllConditionedError("face particular point residual too large")
    N = nullspace_basis(G)
    n = lp.n
    Nc = N.columns
    box = _FACE_BOX_FACTOR * max(1.0, float(np.abs(h).max(initial=0.0)))
    # Rows of the face polyhedron in y-coordinates:  N y + h >= 0 (real),
    # followed by box rows  -(N y + h) >= -B.
    rows_N = np.vstack([Nc, -Nc])
    rows_h = np.concatenate([h, box - h])
    if Nc.shape[1] == 0:
        # ker(G) is trivial: the face is the single point h.
        if h.min(initial=0.0) < -TAU_FEAS * max(1.0, box):
            raise InfeasibleError("optimal face is empty")
        tz = tau_zero(h)
        explicit = [i for i in range(n) if h[i] > tz]
        implicit = [i for i in range(n) if h[i] <= tz]
    else:
        # Implicit rows can only come from the real block.
        poly = HPolyhedron(-rows_N, rows_h)
        cheb, _ = chebyshev_center_region(poly)
        if cheb is None:
            raise InfeasibleError("optimal face is empty")
        explicit, implicit = find_implicit_rows(
            -rows_N, rows_h, candidates=range(n), chebyshev=cheb)
    explicit = explicit + list(range(n, 2 * n))
    N_ex, h_ex = rows_N[explicit], rows_h[explicit]
    N_im, h_im = rows_N[implicit], rows_h[implicit]
    # Implicit rows whose kernel-coordinate coefficients are numerically
    # zero carry no direction information (the variable is fixed by the
    # equalities already); keeping them would inflate the rank estimate.
    live = np.abs(N_im).max(axis=1, initial=0.0) > 1e-9 if len(implicit) \
        else np.zeros(0, dtype=bool)
    if np.any(live):
        aleph = nullspace_basis(N_im[live])
        y_p = _lsq_particular(N_im[live], -h_im[live])
    else:
        aleph = NullspaceBasis(np.eye(Nc.shape[1]))
        y_p = np.zeros(Nc.shape[1])
    image = lp.recovery_R.toarray() @ Nc @ aleph.columns \
        if aleph.dim else np.zeros((lp.n_original, 0))
    if image.size:
        s = np.linalg.svd(image, compute_uv=False)
        n_x = int(np.sum(s > 1e-9 * max(1.0, s[0])))
    else:
        n_x = 0
    return OptimalFace(G=G, v=v, N=N, h=h, explicit=explicit,
                       implicit=implicit, N_ex=N_ex, h_ex=h_ex,
                       N_im=N_im, h_im=h_im, aleph=aleph, y_p=y_p,
                       n_X=n_x, n_real=n, image=image)


def _lsq_particular(M, rhs):
    """Minimum-norm least-squares particular solution via the iterative
    least-squares solver (the rows are generally rank deficient)."""
    if M.shape[0] == 0 or M.shape[1] == 0:
        return np.zeros(M.shape[1])
    res = spla.lsqr(M, rhs, atol=1e-12, btol=1e-12, iter_lim=10 * M.shape[1])
    y = res[0]
    resid = np.linalg.norm(M @ y - rhs)
    if resid > 1e-10 * max(1.0, np.linalg.norm(rhs)):
        # LSQR returns the least-squares optimum even for inconsistent
        # systems; a large residual here means the implicit rows were not
        # actually forcible, which is a classification failure upstream.
        y2, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        if np.linalg.norm(M @ y2 - rhs) < resid:
            y = y2
    return y


def chebyshev_center_face(face: OptimalFace):
    """Relative-interior point of the face, returned in standard-form x
    coordinates: the Chebyshev center of the explicit rows in the reduced
    u coordinates, mapped back through the face parameterization."""
    if face.n_free == 0:
        return face.center_point()
    A_u = face.N_ex @ face.aleph.columns
    b_u = face.N_ex @ face.y_p + face.h_ex
    # rows: A_u u + b_u >= 0, ball radius r in u-metric
    norms = np.linalg.norm(A_u, axis=1)
    live = norms > 1e-12
    M = np.hstack([-A_u[live], norms[live][:, None]])
    t = b_u[live]
    cap = np.append(np.zeros(face.n_free), 1.0)
    M = np.vstack([M, -cap, cap])
    t = np.concatenate([t, [0.0, _RADIUS_CAP]])
    status, y, _ = ineq_lp(M, t, cap)
    if status != "optimal":
        raise InfeasibleError("face Chebyshev LP failed")
    return face.point_from_u(y[:face.n_free])
