import numpy as np
import pytest

from conewalk.polyhedra import (
    ConditioningWarning,
    DegenerateHull,
    HPolytope,
    PolarUnbounded,
    PolyCone,
    VPolytope,
    chebyshev_center,
    cone_contains_h,
    cone_contains_v,
    cone_h_to_v,
    cone_v_to_h,
    convex_hausdorff,
    convex_hull_2d,
    double_description,
    hpolytope_vertices,
    minimal_hrep_cone,
    polar_vertex_enum,
    polygon_area,
)


# --- 2D hull ---------------------------------------------------------------


def brute_force_hull_vertices(pts, tol=1e-12):
    """All-pairs halfplane oracle: (i, j) is a hull edge iff every point lies
    on the left of the directed line i -> j."""
    n = len(pts)
    vertices = set()
    for i in range(n):
        V = pts - pts[i]
        C = np.outer(V[:, 0], V[:, 1]) - np.outer(V[:, 1], V[:, 0])  # C[j,k] = V_j x V_k
        for j in range(n):
            if j == i:
                continue
            if C[j].max() <= tol:
                # all k have V_j x V_k <= 0: every point right of i->j; flip orientation
                vertices.add(i)
                vertices.add(j)
            if C[j].min() >= -tol:
                vertices.add(i)
                vertices.add(j)
    return vertices


def sorted_rows(a):
    a = np.asarray(a)
    return a[np.lexsort((a[:, 1], a[:, 0]))]


def test_hull_drops_interior_point():
    hull = convex_hull_2d([(0, 0), (1, 0), (0, 1), (0.25, 0.25)])
    assert isinstance(hull, VPolytope)
    assert sorted_rows(hull.vertices) == pytest.approx(np.array([[0, 0], [0, 1], [1, 0]]))


def test_hull_single_point_degenerate():
    res = convex_hull_2d([(0.5, -0.25)])
    assert isinstance(res, DegenerateHull)
    assert res.kind == "point"


def test_hull_collinear_segment():
    res = convex_hull_2d([(0, 0), (1, 1), (2, 2), (0.5, 0.5)])
    assert isinstance(res, DegenerateHull)
    assert res.kind == "segment"
    assert sorted_rows(res.points) == pytest.approx(np.array([[0, 0], [2, 2]]))


def test_hull_matches_brute_force_oracle():
    rng = np.random.default_rng(10)
    r = np.sqrt(rng.uniform(0, 1, size=1000))
    th = rng.uniform(0, 2 * np.pi, size=1000)
    pts = np.column_stack([r * np.cos(th), r * np.sin(th)])
    hull = convex_hull_2d(pts)
    expected = brute_force_hull_vertices(pts)
    got = sorted_rows(hull.vertices)
    exp = sorted_rows(pts[sorted(expected)])
    assert got.shape == exp.shape
    assert np.abs(got - exp).max() < 1e-12


def test_hull_ccw_and_idempotent():
    rng = np.random.default_rng(11)
    pts = rng.normal(size=(60, 2))
    hull = convex_hull_2d(pts)
    assert polygon_area(hull.vertices) > 0  # CCW
    again = convex_hull_2d(hull.vertices)
    assert np.abs(again.vertices - hull.vertices).max() < 1e-15


# --- polar vertex enumeration ----------------------------------------------


def polytope_vertices_via_dd(B):
    """Oracle: homogenize {Bx <= 1} as a cone in (x, t) and read vertices."""
    rows = np.hstack([B, -np.ones((B.shape[0], 1))])
    rays, lin = cone_h_to_v(np.vstack([rows, [[0, 0, -1]]]))
    assert lin.shape[0] == 0
    verts = [r[:2] / r[2] for r in rays if r[2] > 1e-9]
    return np.array(verts)


def test_polar_unit_square():
    B = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    poly = polar_vertex_enum(B)
    assert isinstance(poly, VPolytope)
    assert sorted_rows(poly.vertices) == pytest.approx(
        np.array([[-1, -1], [-1, 1], [1, -1], [1, 1]])
    )


def test_polar_duplicate_row_invariance():
    B = np.array([[1.0, 0.2], [-1, 0.4], [0.1, 1], [-0.3, -1]])
    B_dup = np.vstack([B, B[2]])
    v1 = polar_vertex_enum(B).vertices
    v2 = polar_vertex_enum(B_dup).vertices
    assert convex_hausdorff(v1, v2) < 1e-12


def test_polar_matches_dd_oracle():
    rng = np.random.default_rng(12)
    for _ in range(50):
        m = rng.integers(4, 12)
        th = rng.uniform(0, 2 * np.pi, size=m)
        B = np.column_stack([np.cos(th), np.sin(th)]) + 0.05 * rng.normal(size=(m, 2))
        poly = polar_vertex_enum(B)
        if isinstance(poly, PolarUnbounded):
            continue
        oracle = polytope_vertices_via_dd(B)
        assert convex_hausdorff(poly.vertices, oracle) < 1e-8


def test_polar_unbounded_detected():
    B = np.array([[1.0, 0], [-1, 0], [0, 1]])  # open downward
    res = polar_vertex_enum(B)
    assert isinstance(res, PolarUnbounded)
    assert len(res.directions) > 0
    for d in res.directions:
        assert (B @ d).max() <= 1e-9


def test_polar_consistency_with_membership():
    # x satisfies Bx <= 1 iff x in conv(vertices), on sampled points.
    rng = np.random.default_rng(13)
    th = np.linspace(0, 2 * np.pi, 7, endpoint=False)
    B = np.column_stack([np.cos(th), np.sin(th)]) * rng.uniform(0.5, 2.0, size=(7, 1))
    poly = polar_vertex_enum(B)
    from conewalk.polyhedra import point_in_polygon

    for _ in range(500):
        x = rng.normal(size=2)
        in_h = (B @ x).max() <= 1.0
        in_v = point_in_polygon(poly.vertices, x, tol=1e-8)
        slack = abs((B @ x).max() - 1.0)
        assert in_h == in_v or slack < 1e-8


# --- Chebyshev center -------------------------------------------------------


def test_chebyshev_unit_square():
    poly = HPolytope([[1, 0], [-1, 0], [0, 1], [0, -1]], [1, 1, 1, 1])
    c, r = chebyshev_center(poly)
    assert c == pytest.approx([0, 0], abs=1e-9)
    assert r == pytest.approx(1.0, abs=1e-9)


def test_chebyshev_345_incenter():
    # Triangle (0,0), (4,0), (0,3): inradius (3+4-5)/2 = 1, incenter (1,1).
    poly = HPolytope([[-1, 0], [0, -1], [3.0 / 5, 4.0 / 5]], [0, 0, 12.0 / 5])
    c, r = chebyshev_center(poly)
    assert c == pytest.approx([1, 1], abs=1e-9)
    assert r == pytest.approx(1.0, abs=1e-9)


def test_chebyshev_empty():
    poly = HPolytope([[1.0], [-1.0]], [-1.0, -1.0])
    assert chebyshev_center(poly) is None


def test_hpolytope_vertices_degenerate_point_and_segment():
    point = hpolytope_vertices(HPolytope([[1, 0], [-1, 0], [0, 1], [0, -1]], [0.3, -0.3, 0.2, -0.2]))
    assert isinstance(point, DegenerateHull)
    assert point.kind == "point"
    assert point.points[0] == pytest.approx([0.3, 0.2], abs=1e-7)
    seg = hpolytope_vertices(HPolytope([[1, 0], [-1, 0], [0, 1], [0, -1]], [1.0, 1.0, 0.0, 0.0]))
    assert isinstance(seg, DegenerateHull)
    assert seg.kind == "segment"
    assert sorted_rows(seg.points) == pytest.approx(np.array([[-1.0, 0], [1.0, 0]]), abs=1e-7)


def test_hpolytope_vertices_translated_box():
    poly = HPolytope([[1, 0], [-1, 0], [0, 1], [0, -1]], [5.0, -3.0, 1.0, 1.0])
    verts = hpolytope_vertices(poly)
    assert sorted_rows(verts.vertices) == pytest.approx(
        np.array([[3, -1], [3, 1], [5, -1], [5, 1]]), abs=1e-8
    )


# --- double description ------------------------------------------------------


def test_dd_octant_both_ways():
    rays, lin = cone_h_to_v(-np.eye(3))
    assert lin.shape[0] == 0
    assert convex_hausdorff_rays(rays, np.eye(3)) < 1e-12
    rows = cone_v_to_h(np.eye(3))
    assert convex_hausdorff_rays(rows, -np.eye(3)) < 1e-12


def convex_hausdorff_rays(R1, R2):
    """Set distance between unit ray collections (order-insensitive)."""
    R1 = np.atleast_2d(R1)
    R2 = np.atleast_2d(R2)
    if R1.shape[0] != R2.shape[0]:
        return np.inf
    d12 = max(min(np.linalg.norm(r1 - r2) for r2 in R2) for r1 in R1)
    d21 = max(min(np.linalg.norm(r1 - r2) for r1 in R1) for r2 in R2)
    return max(d12, d21)


def friction_pyramid_rays(mu=0.7):
    k = mu / np.sqrt(2)
    return np.array([[s1 * k, s2 * k, 1.0] for s1 in (1, -1) for s2 in (1, -1)])


def test_dd_friction_pyramid_membership():
    rays = friction_pyramid_rays()
    rows = cone_v_to_h(rays)
    assert rows.shape == (4, 3)
    rng = np.random.default_rng(14)
    # Constructed members must pass the halfspace test...
    lam = rng.uniform(0, 1, size=(5000, 4))
    members = lam @ rays
    assert (rows @ members.T).max() < 1e-9
    # ...and row verdicts must agree with the conic-combination LP.
    for v in rng.normal(size=(200, 3)):
        h_slack = float((rows @ v).max())
        v_member = cone_contains_v(rays, v)
        if abs(h_slack) > 1e-8:
            assert (h_slack <= 0) == v_member


def test_dd_round_trip_h_to_v_to_h():
    rng = np.random.default_rng(15)
    for _ in range(20):
        m = rng.integers(3, 7)
        A = rng.normal(size=(m, 3))
        rays, lin = cone_h_to_v(A)
        if rays.shape[0] == 0 and lin.shape[0] == 0:
            continue
        A2 = cone_v_to_h(rays, lin if lin.size else None)
        samples = rng.normal(size=(10000, 3))
        s1 = (A / np.linalg.norm(A, axis=1)[:, None]) @ samples.T
        s2 = A2 @ samples.T if A2.size else np.zeros((1, samples.shape[0]))
        in1 = s1.max(axis=0) <= 1e-9
        in2 = s2.max(axis=0) <= 1e-9
        boundary = np.abs(s1.max(axis=0)) < 1e-8
        disagree = (in1 != in2) & ~boundary
        assert not disagree.any()


def test_dd_v_to_h_to_v_span():
    rng = np.random.default_rng(16)
    for _ in range(15):
        k = rng.integers(2, 9)
        R = rng.normal(size=(k, 3))
        rows = cone_v_to_h(R)
        if rows.size == 0:
            continue  # cone spans the whole space
        rays2, lin2 = cone_h_to_v(rows)
        for r in rays2:
            assert cone_contains_v(R, r), "reconstructed ray outside original cone"
        for r in R:
            assert cone_contains_v(rays2, r, lineality=lin2 if lin2.size else None)


def test_dd_halfplane_lineality():
    rays, lin = cone_h_to_v(np.array([[0.0, 0, 1]]))
    # {z <= 0}: two free directions and one ray pointing down.
    assert lin.shape[0] == 2
    assert rays.shape[0] == 1
    assert rays[0][2] < 0
    assert abs(lin @ np.array([0, 0, 1.0])).max() < 1e-12


def test_dd_point_cone():
    rays, lin = cone_h_to_v(np.vstack([np.eye(3), -np.eye(3)]))
    assert rays.shape[0] == 0 and lin.shape[0] == 0


def test_double_description_wrapper():
    cone = double_description(PolyCone.from_h(-np.eye(3)))
    assert cone.rays.shape == (3, 3)
    cone2 = double_description(PolyCone.from_v(np.eye(3)))
    assert cone2.normals.shape == (3, 3)


def test_minimal_hrep_drops_redundant_keeps_equalities():
    rows = np.array([[0, 0, 1.0], [0, 0, -1], [1, 0, 0], [0.9, 0, 0.1]])
    kept = minimal_hrep_cone(rows)
    # The (0.9, 0, 0.1) row is implied by z<=0, z>=0, x<=0.
    assert kept.shape[0] == 3
    assert cone_contains_h(kept, [-1, 5, 0])
    assert not cone_contains_h(kept, [0, 0, 0.1])
    assert not cone_contains_h(kept, [0, 0, -0.1])


def test_conditioning_warning_on_marginal_pivot():
    a2 = np.array([-1.0, 1e-8, 0.0])
    rows = np.vstack([[1.0, 0, 0], a2 / np.linalg.norm(a2)])
    with pytest.warns(ConditioningWarning):
        cone_h_to_v(rows)
