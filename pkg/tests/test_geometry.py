import numpy as np
import pytest
from numpy.testing import assert_allclose

import oracles
from generators import random_degenerate_general_lp
from problems import two_var_demand_lp

from mplp.errors import InfeasibleError, ProjectionOverflowError
from mplp.geometry import (
    HPolyhedron,
    build_optimal_face,
    chebyshev_center_face,
    chebyshev_center_region,
    find_implicit_rows,
    ineq_lp,
    linf_distance,
    project_polyhedron,
    remove_redundant,
)
from mplp.lp import solve_lp, to_standard_form
from mplp.sparsela import SparseMatrix


def unit_square():
    return HPolyhedron.from_box([0.0, 0.0], [1.0, 1.0])


def triangle():
    # x >= 0, y >= 0, x + y <= 1
    return HPolyhedron([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]],
                       [0.0, 0.0, 1.0])


# ---------------------------------------------------------------------------
# H-representation basics

def test_box_membership():
    p = unit_square()
    assert p.contains([0.5, 0.5])
    assert p.contains([1.0, 0.0])
    assert not p.contains([1.1, 0.5])


def test_empty_set_is_distinguished_from_whole_space():
    empty = HPolyhedron.empty_set(3)
    whole = HPolyhedron(np.zeros((0, 3)), np.zeros(0))
    assert empty.empty and not whole.empty
    assert not empty.contains([0.0, 0.0, 0.0])
    assert whole.contains([5.0, -7.0, 0.0])


def test_intersection_stacks_rows():
    p = unit_square().intersect(triangle())
    assert p.n_rows == 7
    assert p.contains([0.2, 0.3])
    assert not p.contains([0.8, 0.8])
    assert unit_square().intersect(HPolyhedron.empty_set(2)).empty


def test_row_count_mismatch_rejected():
    with pytest.raises(ValueError):
        HPolyhedron([[1.0, 0.0]], [1.0, 2.0])


# ---------------------------------------------------------------------------
# inequality LP helper

def test_ineq_lp_on_square():
    M, t = unit_square().rows()
    status, y, value = ineq_lp(M, t, [1.0, 2.0])
    assert status == "optimal"
    assert_allclose(y, [1.0, 1.0], atol=1e-9)
    assert value == pytest.approx(3.0, abs=1e-9)


def test_ineq_lp_detects_unbounded_and_infeasible():
    status, _, _ = ineq_lp([[1.0, 0.0]], [1.0], [0.0, 1.0])
    assert status == "unbounded"
    status, _, _ = ineq_lp([[1.0], [-1.0]], [0.0, -1.0], [1.0])
    assert status == "infeasible"


# ---------------------------------------------------------------------------
# Chebyshev centers

def test_chebyshev_center_unit_square():
    center, radius = chebyshev_center_region(unit_square())
    assert_allclose(center, [0.5, 0.5], atol=1e-9)
    assert radius == pytest.approx(0.5, abs=1e-9)


def test_chebyshev_center_triangle_matches_oracle():
    M, t = triangle().rows()
    _, r_ref = oracles.chebyshev_oracle(M, t)
    center, radius = chebyshev_center_region(triangle())
    assert radius == pytest.approx(r_ref, abs=1e-9)
    # the right isoceles triangle with legs 1 has an analytic radius
    assert radius == pytest.approx(1.0 / (2.0 + np.sqrt(2.0)), abs=1e-9)
    slack = t - M @ center
    assert np.min(slack) >= radius - 1e-9


def test_chebyshev_center_contradictory_rows():
    p = HPolyhedron([[1.0, 0.0], [-1.0, 0.0]], [0.0, -1.0])
    assert chebyshev_center_region(p) == (None, None)


def test_chebyshev_center_random_agrees_with_oracle():
    rng = np.random.default_rng(7)
    for _ in range(12):
        d = int(rng.integers(2, 4))
        M = np.vstack([np.eye(d), -np.eye(d),
                       rng.normal(size=(int(rng.integers(1, 4)), d))])
        t = np.concatenate([np.full(2 * d, 2.0), rng.uniform(0.5, 2.0,
                                                             M.shape[0] - 2 * d)])
        _, r_ref = oracles.chebyshev_oracle(M, t)
        center, radius = chebyshev_center_region(HPolyhedron(M, t))
        assert radius == pytest.approx(r_ref, abs=1e-7)
        assert np.all(M @ center - t <= 1e-9)


# ---------------------------------------------------------------------------
# redundancy removal

def test_remove_redundant_drops_loose_row():
    M, t = unit_square().rows()
    p = HPolyhedron(np.vstack([M, [1.0, 0.0]]), np.append(t, 2.0))
    reduced = remove_redundant(p)
    assert reduced.minimal
    assert reduced.n_rows == 4


def test_remove_redundant_keeps_one_duplicate():
    M, t = unit_square().rows()
    p = HPolyhedron(np.vstack([M, M[0]]), np.append(t, t[0]))
    reduced = remove_redundant(p)
    assert reduced.n_rows == 4
    assert reduced.contains([1.0, 0.5]) and not reduced.contains([1.01, 0.5])


def test_remove_redundant_detects_empty():
    p = HPolyhedron([[1.0], [-1.0]], [0.0, -1.0])
    assert remove_redundant(p).empty


def test_remove_redundant_preserves_membership():
    rng = np.random.default_rng(11)
    for _ in range(10):
        d = int(rng.integers(2, 4))
        M = np.vstack([np.eye(d), -np.eye(d),
                       rng.normal(size=(int(rng.integers(2, 6)), d))])
        t = np.concatenate([np.full(2 * d, 1.0),
                            rng.uniform(0.2, 2.0, M.shape[0] - 2 * d)])
        p = HPolyhedron(M, t)
        reduced = remove_redundant(p)
        assert reduced.n_rows <= p.n_rows
        for _ in range(25):
            pt = rng.uniform(-1.5, 1.5, d)
            assert p.contains(pt) == reduced.contains(pt)


# ---------------------------------------------------------------------------
# implicit rows

def test_implicit_rows_on_thin_set():
    # x + y <= 1 and x + y >= 1 squeeze to a line; the box rows stay explicit.
    M = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, 0.0], [-1.0, 0.0]])
    t = np.array([1.0, -1.0, 2.0, 2.0])
    explicit, implicit = find_implicit_rows(M, t)
    assert implicit == [0, 1]
    assert explicit == [2, 3]


def test_implicit_rows_full_dimensional_set():
    M, t = unit_square().rows()
    explicit, implicit = find_implicit_rows(M, t)
    assert implicit == []
    assert explicit == [0, 1, 2, 3]


def test_implicit_rows_on_empty_set_raises():
    with pytest.raises(InfeasibleError):
        find_implicit_rows([[1.0], [-1.0]], [0.0, -1.0])


# ---------------------------------------------------------------------------
# projection

def test_project_simplex_to_triangle():
    # {x, y, z >= 0, x + y + z <= 1} projected onto (x, y).
    M = np.vstack([-np.eye(3), np.ones(3)])
    t = np.array([0.0, 0.0, 0.0, 1.0])
    proj = remove_redundant(project_polyhedron(HPolyhedron(M, t), keep=2))
    assert proj.n_rows == 3
    tri = triangle()
    rng = np.random.default_rng(3)
    for _ in range(50):
        pt = rng.uniform(-0.3, 1.2, 2)
        assert proj.contains(pt) == tri.contains(pt)


def test_project_keep_all_is_identity():
    p = unit_square()
    assert project_polyhedron(p, keep=2) is p


def test_projection_membership_matches_oracle():
    rng = np.random.default_rng(19)
    for _ in range(8):
        keep = int(rng.integers(1, 3))
        lift = int(rng.integers(1, 3))
        d = keep + lift
        M = np.vstack([np.eye(d), -np.eye(d),
                       rng.normal(size=(int(rng.integers(1, 5)), d))])
        t = np.concatenate([np.full(2 * d, 1.0),
                            rng.uniform(0.3, 1.5, M.shape[0] - 2 * d)])
        proj = project_polyhedron(HPolyhedron(M, t), keep=keep)
        for _ in range(20):
            pt = rng.uniform(-1.3, 1.3, keep)
            assert proj.contains(pt) == \
                oracles.projection_member_oracle(M, t, pt)


def test_projection_of_empty_lift():
    M = np.array([[0.0, 1.0], [0.0, -1.0]])
    t = np.array([0.0, -1.0])
    assert project_polyhedron(HPolyhedron(M, t), keep=1).empty


def test_projection_row_cap():
    rng = np.random.default_rng(5)
    half = 160
    col = np.concatenate([np.ones(half), -np.ones(half)])
    rest = rng.normal(size=(2 * half, 2))
    M = np.hstack([rest, col[:, None]])
    t = rng.uniform(1.0, 2.0, 2 * half)
    with pytest.raises(ProjectionOverflowError):
        project_polyhedron(HPolyhedron(M, t), keep=2)


# ---------------------------------------------------------------------------
# distance

def test_linf_distance_inside_and_outside():
    p = unit_square()
    dist, point = linf_distance(p, [0.25, 0.5])
    assert dist == pytest.approx(0.0, abs=1e-9)
    dist, point = linf_distance(p, [2.0, 0.5])
    assert dist == pytest.approx(1.0, abs=1e-8)
    assert p.contains(point, tol=1e-7)
    assert linf_distance(HPolyhedron.empty_set(2), [0.0, 0.0]) == (None, None)


# ---------------------------------------------------------------------------
# optimal faces

def demand_face(theta):
    g, *_ = two_var_demand_lp()
    lp = to_standard_form(g)
    sol = solve_lp(lp, theta)
    assert sol.status == "optimal"
    return lp, sol, build_optimal_face(lp, theta, sol.z)


def test_face_particular_point_residual():
    lp, sol, face = demand_face([0.25, 0.75])
    assert_allclose(face.G @ face.h, face.v, atol=1e-8)
    # the optimal vertex lies on the affine hull of the face
    y = face.N.columns.T @ (sol.x - face.h)
    assert_allclose(face.N.matvec(y) + face.h, sol.x, atol=1e-8)


def test_face_segment_has_one_image_dimension():
    lp, sol, face = demand_face([0.25, 0.75])
    # three kernel directions (one segment + two split rays), one of which
    # survives the mapping back to original variables
    assert face.n_free == 3
    assert face.n_X == 1
    assert face.implicit  # the forced-zero slack of the tight demand row


def test_face_center_is_segment_midpoint():
    lp, sol, face = demand_face([0.25, 0.75])
    center = chebyshev_center_face(face)
    assert_allclose(lp.recover(center, [0.25, 0.75]), [1.25, 1.5],
                    atol=1e-7)
    # feasibility of the mapped point in the standard form
    assert np.min(center) >= -1e-9
    assert_allclose(lp.dense_A() @ center, lp.rhs([0.25, 0.75]), atol=1e-8)


def test_face_center_is_deterministic():
    _, _, face1 = demand_face([0.25, 0.75])
    _, _, face2 = demand_face([0.25, 0.75])
    assert np.array_equal(chebyshev_center_face(face1),
                          chebyshev_center_face(face2))


def test_face_at_unique_vertex_has_no_image_freedom():
    lp, sol, face = demand_face([0.25, 0.0])
    # the split rays remain in the kernel but have no original image
    assert face.n_free == 2
    assert face.n_X == 0
    center = chebyshev_center_face(face)
    assert_allclose(lp.recover(center, [0.25, 0.0]), [1.0, 1.25], atol=1e-7)


def test_face_endpoints_match_enumeration():
    lp, sol, face = demand_face([0.25, 0.75])
    theta = [0.25, 0.75]
    status, _, verts = oracles.standard_lp_oracle(-lp.c, lp.dense_A(),
                                                  lp.rhs(theta))
    assert status == "optimal"
    images = {tuple(np.round(lp.recover(v, theta), 6)) for v in verts}
    assert images == {(1.0, 1.75), (1.5, 1.25)}


def test_face_point_with_forced_zero_pair():
    # max 0.1 x1 + x4  s.t.  x1 + x2 = 0, x3 + x4 = 1, x >= 0: the kernel
    # direction trades x1 against x2, both forced to zero on the face.
    A = SparseMatrix.from_dense(np.array([[1.0, 1.0, 0.0, 0.0],
                                          [0.0, 0.0, 1.0, 1.0]]))
    from mplp.lp import StandardFormLP
    lp = StandardFormLP(A, [0.0, 1.0], None, [0.1, 0.0, 0.0, 1.0])
    sol = solve_lp(lp, [])
    face = build_optimal_face(lp, [], sol.z)
    # x3 = 0.1 x1 on the face, so it is forced to zero along with the pair
    assert sorted(face.implicit) == [0, 1, 2]
    assert np.linalg.norm(face.N_im @ face.y_p + face.h_im) <= 1e-8
    assert face.n_free == 0 and face.n_X == 0
    assert_allclose(chebyshev_center_face(face), [0.0, 0.0, 0.0, 1.0],
                    atol=1e-8)


def test_face_zero_kernel_single_point():
    # max 0.1 x1 + x3  s.t.  x1 + x2 = 0, x2 + x3 = 1: full-rank G with a
    # trivial kernel; the face degenerates to one point.
    from mplp.lp import StandardFormLP
    lp = StandardFormLP(np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]]),
                        [0.0, 1.0], None, [0.1, 0.0, 1.0])
    sol = solve_lp(lp, [])
    face = build_optimal_face(lp, [], sol.z)
    assert face.n_free == 0 and face.n_X == 0
    assert_allclose(chebyshev_center_face(face), sol.x, atol=1e-9)
    assert sorted(face.implicit) == [0, 1]


def test_face_invariants_on_degenerate_instances():
    rng = np.random.default_rng(23)
    for _ in range(10):
        g, lo, hi = random_degenerate_general_lp(
            rng, n_vars=int(rng.integers(2, 4)),
            n_rows=int(rng.integers(4, 7)), n_dup=1)
        lp = to_standard_form(g)
        theta = rng.uniform(lo, hi)
        sol = solve_lp(lp, theta)
        if sol.status != "optimal":
            continue
        face = build_optimal_face(lp, theta, sol.z)
        # particular point solves the equality system
        assert np.max(np.abs(face.G @ face.h - face.v)) <= 1e-7
        # implicit rows vanish at the reduced particular point
        if len(face.implicit):
            assert np.max(np.abs(face.N_im @ face.y_p + face.h_im)) <= 1e-7
        # the face center is primal feasible with the optimal value
        center = chebyshev_center_face(face)
        assert np.min(center) >= -1e-7
        assert np.max(np.abs(lp.dense_A() @ center - lp.rhs(theta))) <= 1e-6
        assert lp.c @ center == pytest.approx(sol.z, abs=1e-6)
