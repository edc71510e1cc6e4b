"""Sparse matrix kernel: triplet matrices, index permutations, pseudoinverse
solves, null-space bases and rank checks.

Matrices cross the public interface as coordinate triplets and are stored
compressed (CSC) internally.  The pseudoinverse solves are the two workhorses
of the solution-map construction:

    left_pinv_solve :  x = (A1' A1)^-1 A1' b      (full column rank)
    min_norm_dual   :  lam = -A1 (A1' A1)^-1 c1   (minimum-norm dual)

Small systems (<= 500 columns) go through dense SVD/Cholesky; larger ones
through sparse LU on the normal equations.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FormatError, RankDeficientError
from .tolerances import TAU_RANK_REL, ZERO_DROP

# Column count at or below which dense factorizations are used.
DENSE_COLUMN_LIMIT = 500


class SparseMatrix:
    """Immutable sparse matrix with a coordinate-triplet interface.

    Duplicate (row, col) pairs are rejected rather than summed, entries with
    magnitude below ``ZERO_DROP`` are dropped, and indices are validated
    against the declared shape.
    """

    __slots__ = ("shape", "_csc")

    def __init__(self, shape, rows, cols, vals):
        m, n = int(shape[0]), int(shape[1])
        if m < 0 or n < 0:
            raise FormatError(f"invalid shape {shape!r}")
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        vals = np.asarray(vals, dtype=float).ravel()
        if not (rows.size == cols.size == vals.size):
            raise FormatError("triplet arrays must have equal length")
        if rows.size:
            if rows.min(initial=0) < 0 or cols.min(initial=0) < 0:
                raise FormatError("negative triplet index")
            if rows.max(initial=-1) >= m or cols.max(initial=-1) >= n:
                raise FormatError("triplet index out of range for shape "
                                  f"({m}, {n})")
            if not np.all(np.isfinite(vals)):
                raise FormatError("non-finite value in triplets")
            keys = rows * n + cols
            if np.unique(keys).size != keys.size:
                raise FormatError("duplicate (row, col) pair in triplets")
        keep = np.abs(vals) > ZERO_DROP
        self.shape = (m, n)
        self._csc = sp.csc_matrix(
            (vals[keep], (rows[keep], cols[keep])), shape=(m, n))

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_dense(cls, a):
        a = np.atleast_2d(np.asarray(a, dtype=float))
        rows, cols = np.nonzero(np.abs(a) > ZERO_DROP)
        return cls(a.shape, rows, cols, a[rows, cols])

    @classmethod
    def _from_csc(cls, csc):
        obj = cls.__new__(cls)
        csc = sp.csc_matrix(csc)
        csc.sum_duplicates()
        csc.eliminate_zeros()
        obj.shape = csc.shape
        obj._csc = csc
        return obj

    # -- views --------------------------------------------------------------

    def triplets(self):
        """Return (rows, cols, vals) in deterministic column-major order."""
        coo = self._csc.tocoo()
        order = np.lexsort((coo.row, coo.col))
        return coo.row[order], coo.col[order], coo.data[order]

    def toarray(self):
        return self._csc.toarray()

    def tocsc(self):
        return self._csc

    @property
    def nnz(self):
        return self._csc.nnz

    def take_columns(self, idx):
        """Submatrix of the given columns, in the given order."""
        idx = np.asarray(idx, dtype=np.int64)
        return SparseMatrix._from_csc(self._csc[:, idx])

    def transpose(self):
        return SparseMatrix._from_csc(self._csc.T)

    def matvec(self, x):
        return self._csc @ np.asarray(x, dtype=float)

    def rmatvec(self, y):
        return self._csc.T @ np.asarray(y, dtype=float)

    def __repr__(self):
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


class Permutation:
    """Index permutation written both ways.

    ``order[k]`` is the original index placed at position ``k`` (so the
    permuted matrix is ``A[:, order]``); ``position[j]`` is the new position
    of original index ``j``.  As a matrix, P[order[k], k] = 1, so that
    A_bar = A P and x_bar = P' x.
    """

    __slots__ = ("order", "position")

    def __init__(self, order):
        order = np.asarray(order, dtype=np.int64).ravel()
        n = order.size
        if np.unique(order).size != n or (n and (order.min() < 0
                                                 or order.max() >= n)):
            raise FormatError("not a permutation of 0..n-1")
        self.order = order
        position = np.empty(n, dtype=np.int64)
        position[order] = np.arange(n)
        self.position = position

    @property
    def size(self):
        return self.order.size

    def as_matrix(self):
        n = self.size
        return SparseMatrix((n, n), self.order, np.arange(n), np.ones(n))

    def permute_columns(self, a):
        """A P: reorder columns so the selected block comes first."""
        if isinstance(a, SparseMatrix):
            return a.take_columns(self.order)
        return np.asarray(a)[:, self.order]

    def permute_vector(self, x):
        """P' x: vector in permuted coordinates."""
        return np.asarray(x)[self.order]

    def restore_vector(self, x_bar):
        """P x_bar: back to original coordinates."""
        x = np.empty_like(np.asarray(x_bar, dtype=float))
        x[self.order] = x_bar
        return x


class NullspaceBasis:
    """Orthonormal basis of a kernel, held as a dense column block."""

    __slots__ = ("columns",)

    def __init__(self, columns):
        self.columns = np.asarray(columns, dtype=float)

    @property
    def dim(self):
        return self.columns.shape[1]

    def matvec(self, z):
        return self.columns @ np.asarray(z, dtype=float)


def permutation_from_partition(nonzero, n):
    """Permutation placing the (ascending) nonzero index set first.

    The complement follows, also ascending, so the result is a deterministic
    function of the partition.
    """
    nonzero = np.asarray(sorted(set(int(j) for j in nonzero)), dtype=np.int64)
    if nonzero.size and (nonzero[0] < 0 or nonzero[-1] >= n):
        raise FormatError("nonzero index out of range")
    mask = np.zeros(n, dtype=bool)
    mask[nonzero] = True
    complement = np.nonzero(~mask)[0]
    return Permutation(np.concatenate([nonzero, complement]))


def _as_dense(a):
    if isinstance(a, SparseMatrix):
        return a.toarray()
    if sp.issparse(a):
        return np.asarray(a.todense())
    return np.atleast_2d(np.asarray(a, dtype=float))


def _dense_svd_rank(a):
    """(rank, singular values) with the relative threshold."""
    if min(a.shape) == 0:
        return 0, np.zeros(0)
    s = np.linalg.svd(a, compute_uv=False)
    cutoff = TAU_RANK_REL * s[0] if s.size and s[0] > 0 else 0.0
    return int(np.sum(s > cutoff)), s


def check_full_column_rank(a):
    """True when the matrix has full column rank under the relative
    singular-value (or pivot) threshold."""
    if isinstance(a, SparseMatrix) or sp.issparse(a):
        m, n = a.shape
        if n > DENSE_COLUMN_LIMIT:
            return _sparse_rank_estimate(a) == n
        a = _as_dense(a)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    rank, _ = _dense_svd_rank(a)
    return rank == a.shape[1]


def _sparse_rank_estimate(a):
    """Rank estimate from the pivot magnitudes of a sparse LU of A'A."""
    csc = a.tocsc() if isinstance(a, SparseMatrix) else sp.csc_matrix(a)
    gram = (csc.T @ csc).tocsc()
    n = gram.shape[0]
    try:
        lu = spla.splu(gram, permc_spec="COLAMD",
                       options={"SymmetricMode": True})
    except RuntimeError:
        return _dense_svd_rank(gram.toarray())[0]
    piv = np.abs(lu.U.diagonal())
    if piv.size == 0:
        return 0
    cutoff = TAU_RANK_REL * piv.max()
    # Gram pivots are squared-scale, which only sharpens the test.
    return int(np.sum(piv > cutoff)) if piv.max() > 0 else 0


def _normal_equation_solve(a, rhs):
    """Solve (A'A) y = rhs with a rank check, dense or sparse by size."""
    m, n = a.shape
    if n <= DENSE_COLUMN_LIMIT:
        ad = _as_dense(a)
        rank, s = _dense_svd_rank(ad)
        if rank < n:
            raise RankDeficientError(
                f"matrix of shape {a.shape} has column rank {rank} < {n}")
        gram = ad.T @ ad
        try:
            cho = np.linalg.cholesky(gram)
        except np.linalg.LinAlgError as exc:
            raise RankDeficientError(str(exc)) from exc
        y = np.linalg.solve(cho.T, np.linalg.solve(cho, rhs))
        return y
    csc = a.tocsc() if isinstance(a, SparseMatrix) else sp.csc_matrix(a)
    gram = (csc.T @ csc).tocsc()
    try:
        lu = spla.splu(gram, permc_spec="COLAMD",
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise RankDeficientError(str(exc)) from exc
    piv = np.abs(lu.U.diagonal())
    if piv.size and piv.max() > 0 and np.any(piv <= TAU_RANK_REL * piv.max()):
        raise RankDeficientError(
            f"near-zero pivot in sparse factorization of shape {a.shape}")
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim == 1:
        return lu.solve(rhs)
    return np.column_stack([lu.solve(rhs[:, k]) for k in range(rhs.shape[1])])


def left_pinv_solve(a1, b):
    """Least-squares solve x = (A1'A1)^-1 A1' b for full-column-rank A1.

    Accepts a vector or matrix right-hand side; raises RankDeficientError
    when the factorization meets a dependent column.
    """
    b = np.asarray(b, dtype=float)
    if isinstance(a1, SparseMatrix):
        atb = a1.tocsc().T @ b
    else:
        atb = np.asarray(a1, dtype=float).T @ b
    return _normal_equation_solve(a1, atb)


def right_pinv_solve(a1, b):
    """Minimum-norm solve x = A1' (A1 A1')^-1 b for full-row-rank A1."""
    at = a1.transpose() if isinstance(a1, SparseMatrix) else \
        np.asarray(a1, dtype=float).T
    y = _normal_equation_solve(at, np.asarray(b, dtype=float))
    if isinstance(at, SparseMatrix):
        return at.tocsc() @ y
    return at @ y


def min_norm_dual(a1, c1):
    """Minimum-norm dual particular solution lam_p = -A1 (A1'A1)^-1 c1."""
    y = _normal_equation_solve(a1, np.asarray(c1, dtype=float))
    if isinstance(a1, SparseMatrix):
        return -(a1.tocsc() @ y)
    return -(np.asarray(a1, dtype=float) @ y)


def nullspace_basis(m):
    """Orthonormal basis of ker(M) as a NullspaceBasis.

    Dense SVD up to ``DENSE_COLUMN_LIMIT`` columns; above that the kernel is
    read off a sparse LU factorization and re-orthonormalized.
    """
    n = m.shape[1]
    if n <= DENSE_COLUMN_LIMIT:
        md = _as_dense(m)
        if md.shape[0] == 0:
            return NullspaceBasis(np.eye(n))
        u, s, vt = np.linalg.svd(md, full_matrices=True)
        cutoff = TAU_RANK_REL * s[0] if s.size and s[0] > 0 else 0.0
        rank = int(np.sum(s > cutoff))
        return NullspaceBasis(vt[rank:].T.copy())
    return _sparse_nullspace(m)


def _sparse_nullspace(m):
    """Kernel basis from sparse LU: split columns into pivot/free on U,
    back-substitute each free column, then orthonormalize.  Falls back to
    dense SVD when the factorization fails or the residual check does."""
    csc = m.tocsc() if isinstance(m, SparseMatrix) else sp.csc_matrix(m)
    nrows, ncols = csc.shape
    # Work on A'A to get a square symmetric system with the same kernel.
    gram = (csc.T @ csc).tocsc()
    try:
        lu = spla.splu(gram, permc_spec="COLAMD",
                       options={"SymmetricMode": True, "DiagPivotThresh": 0.0})
    except RuntimeError:
        return _dense_nullspace_fallback(csc)
    u = lu.U.tocsr()
    piv = np.abs(u.diagonal())
    cutoff = TAU_RANK_REL * piv.max() if piv.size and piv.max() > 0 else 0.0
    pivotal = piv > cutoff
    free = np.nonzero(~pivotal)[0]
    if free.size == 0:
        return NullspaceBasis(np.zeros((ncols, 0)))
    # Solve U y = 0 with y[free] = e_k by back substitution on the dense U.
    ud = u.toarray()
    cols = []
    for f in free:
        y = np.zeros(ncols)
        y[f] = 1.0
        for i in range(int(f) - 1, -1, -1):
            if pivotal[i]:
                y[i] = -(ud[i, i + 1:] @ y[i + 1:]) / ud[i, i]
        # Undo the column permutation of the factorization.
        z = np.zeros(ncols)
        z[lu.perm_c] = y
        cols.append(z)
    basis = np.column_stack(cols)
    q, _ = np.linalg.qr(basis)
    scale = max(1.0, abs(csc).max() if csc.nnz else 1.0)
    if q.size and np.max(np.abs(csc @ q)) > 1e-6 * scale:
        return _dense_nullspace_fallback(csc)
    return NullspaceBasis(q)


def _dense_nullspace_fallback(csc):
    u, s, vt = np.linalg.svd(csc.toarray(), full_matrices=True)
    cutoff = TAU_RANK_REL * s[0] if s.size and s[0] > 0 else 0.0
    rank = int(np.sum(s > cutoff))
    return NullspaceBasis(vt[rank:].T.copy())


def pseudoinverse(a):
    """Dense Moore-Penrose pseudoinverse (test and small-system helper)."""
    return np.linalg.pinv(_as_dense(a), rcond=TAU_RANK_REL)
