import numpy as np
import pytest
from conftest import rect_contacts, random_stance

from conewalk.contacts import ContactSet, compute_cwc, wrench_realizable
from conewalk.geometry import Screw
from conewalk.regions import GRAVITY, GRAVITY_VEC, accel_cone, static_polygon
from conewalk.tubes import build_tube, cone_membership, extend_tube, tube_cone

MASS = 38.0


def rect_foot(center=(0, 0, 0), rpy=(0, 0, 0), mu=0.7):
    return ContactSet(rect_contacts(center, rpy=rpy, mu=mu))


def sample_tube_points(rng, tube, n):
    lam = rng.dirichlet(np.ones(tube.vertices.shape[0]), size=n)
    return lam @ tube.vertices


# --- tube geometry -----------------------------------------------------------


def test_build_tube_axis_aligned():
    t = build_tube([0, 0, 0.8], [0.3, 0, 0.8], radius=0.05)
    assert t.vertices.shape == (8, 3)
    assert np.abs(np.abs(t.vertices[:, 1]) - 0.05).max() < 1e-12
    assert np.abs(np.abs(t.vertices[:, 2] - 0.8) - 0.05).max() < 1e-12
    assert set(np.round(t.vertices[:, 0], 12)) == {0.0, 0.3}


def test_build_tube_degenerate_cube():
    t = build_tube([0.1, 0.2, 0.8], [0.1, 0.2, 0.8], radius=0.05)
    assert t.vertices.shape == (8, 3)
    spans = t.vertices.max(axis=0) - t.vertices.min(axis=0)
    assert np.allclose(spans, 0.1)
    assert t.hrep.A.shape[0] == 6


def test_tube_contains_segment_and_midpoint_strictly():
    rng = np.random.default_rng(40)
    for _ in range(100):
        p0 = rng.normal(size=3)
        pT = p0 + rng.normal(size=3) * 0.5
        t = build_tube(p0, pT, radius=0.05)
        mid = (p0 + pT) / 2
        assert (t.P @ (mid - t.center)).max() < 1.0 - 1e-9
        for lam in (0.0, 0.25, 0.5, 0.75, 1.0):
            assert t.contains(p0 + lam * (pT - p0), tol=1e-9)
        # facet form and normalized form agree
        x = mid + rng.normal(size=3) * 0.05
        assert t.contains(x) == bool((t.P @ (x - t.center)).max() <= 1.0 + 1e-9)


def test_extend_tube_shares_vertices_and_contains_inner():
    p0, p_mid, pT = np.array([0, 0, 0.8]), np.array([0.15, 0, 0.82]), np.array([0.3, 0, 0.85])
    inner = build_tube(p0, p_mid, radius=0.05)
    outer = extend_tube(inner, pT)
    assert outer.vertices.shape == (12, 3)
    assert np.abs(outer.vertices[:8] - inner.vertices).max() < 1e-15
    for v in inner.vertices:
        assert outer.contains(v, tol=1e-8)
    assert outer.contains(pT, tol=1e-9)


# --- tube cones ---------------------------------------------------------------


def test_point_tube_cone_equals_accel_cone():
    cwc = compute_cwc(rect_foot())
    com = np.array([0.02, 0.01, 0.8])
    # A tube shrunk to (almost) a point: a tiny cube around the COM.  Rows
    # differ from the point cone by O(radius/sigma), hence the slack band.
    tube = build_tube(com, com, radius=1e-5)
    tc = tube_cone(cwc, tube)
    cone = accel_cone(cwc, com)
    rng = np.random.default_rng(41)
    assert tc.kind == "cone" and cone.kind == "cone"
    n_agree = 0
    for _ in range(1000):
        u = rng.normal(size=3) * 5.0
        m_tube, s_tube = cone_membership(tc, u)
        m_pt, s_pt = cone.membership(u)
        band = 1e-3 * (1.0 + np.linalg.norm(u - GRAVITY_VEC))
        if max(abs(s_tube.max()), abs(s_pt.max())) > band:
            assert m_tube == m_pt
            n_agree += 1
    assert n_agree > 800


def test_tube_cone_reduction_soundness():
    rng = np.random.default_rng(42)
    cwc = compute_cwc(rect_foot())
    tube = build_tube([0.0, 0.0, 0.75], [0.05, 0.01, 0.8], radius=0.02)
    tc = tube_cone(cwc, tube)
    assert tc.kind == "cone"
    # raw and reduced verdicts agree on 10^4 samples
    us = rng.normal(size=(10000, 3)) * 6.0
    raw_slack = (tc.raw @ (us - GRAVITY_VEC).T).max(axis=0)
    red_slack = (tc.reduced @ (us - GRAVITY_VEC).T).max(axis=0)
    boundary = np.minimum(np.abs(raw_slack), np.abs(red_slack)) < 1e-7
    agree = (raw_slack <= 1e-9) == (red_slack <= 1e-9)
    assert (agree | boundary).all()
    # and the reduction is substantial
    assert tc.reduced_rows <= tc.raw_rows / 10


def test_proposition_2_subset_direction():
    # Accelerations in the tube cone are feasible at every point of the tube
    # (per-position cone membership AND the ground-truth force LP).
    rng = np.random.default_rng(43)
    cs = rect_foot()
    cwc = compute_cwc(cs)
    tube = build_tube([0.0, 0.0, 0.7], [0.04, -0.01, 0.75], radius=0.02)
    tc = tube_cone(cwc, tube)
    assert tc.kind == "cone"
    centroid = tc.rays.mean(axis=0)
    points = sample_tube_points(rng, tube, 30)
    for _ in range(30):
        lam = rng.uniform(0, 1, size=tc.rays.shape[0])
        ray = lam @ tc.rays + 1e-6 * centroid
        u = GRAVITY_VEC + rng.uniform(0.2, 2.0) * GRAVITY * ray / ray[2]
        ok, _ = cone_membership(tc, u, tol=1e-9)
        assert ok
        for p in points[:10]:
            cone_p = accel_cone(cwc, p)
            member, slacks = cone_p.membership(u, tol=1e-7)
            assert member, f"accel not accepted at tube point {p}: {slacks.max()}"
        for p in points[10:13]:
            f = MASS * (u - GRAVITY_VEC)
            assert wrench_realizable(cs, Screw(resultant=f, moment=[0, 0, 0], ref_point=p)) is not None


def test_proposition_2_converse_direction():
    # Any acceleration feasible at all tube vertices is in the stacked cone.
    rng = np.random.default_rng(44)
    cwc = compute_cwc(rect_foot())
    tube = build_tube([0.0, 0.0, 0.7], [0.05, 0.0, 0.75], radius=0.03)
    tc = tube_cone(cwc, tube)
    vertex_cones = [accel_cone(cwc, v) for v in tube.vertices]
    n_checked = 0
    for k in range(500):
        if k % 2 == 0:
            u = rng.normal(size=3) * 5.0
        else:
            lam = rng.uniform(0, 1, size=tc.rays.shape[0])
            u = GRAVITY_VEC + GRAVITY * (lam @ tc.rays) + rng.normal(size=3) * 0.5
        if all(c.membership(u, tol=0.0)[0] for c in vertex_cones):
            _, slacks = cone_membership(tc, u)
            assert slacks.max() <= 1e-7
            n_checked += 1
    assert n_checked > 20


def test_tube_monotonicity():
    # Shrinking the tube enlarges the feasible cone.
    cwc = compute_cwc(rect_foot())
    small = build_tube([0.0, 0.0, 0.75], [0.04, 0.0, 0.78], radius=0.015)
    big = build_tube([0.0, 0.0, 0.75], [0.04, 0.0, 0.78], radius=0.03)
    tc_small = tube_cone(cwc, small)
    tc_big = tube_cone(cwc, big)
    assert tc_small.kind == "cone" and tc_big.kind == "cone"
    rng = np.random.default_rng(45)
    n = 0
    for k in range(500):
        if k % 2 == 0:
            u = rng.normal(size=3) * 5.0
        else:
            lam = rng.uniform(0, 1, size=tc_big.rays.shape[0])
            u = GRAVITY_VEC + GRAVITY * (lam @ tc_big.rays) + rng.normal(size=3) * 0.2
        ok_big, slacks = cone_membership(tc_big, u)
        if ok_big and slacks.max() < -1e-8:
            assert cone_membership(tc_small, u, tol=1e-9)[0]
            n += 1
    assert n > 20


def test_tube_cone_empty_when_vertex_outside_polygon():
    cwc = compute_cwc(rect_foot())
    # Tube pokes far beyond the foot: some vertex leaves the polygon.
    tube = build_tube([0.0, 0.0, 0.75], [0.4, 0.0, 0.75], radius=0.05)
    tc = tube_cone(cwc, tube)
    assert tc.kind == "empty"
    assert cone_membership(tc, [0, 0, 0]) == (False, None)


def test_zero_accel_member_iff_tube_inside_polygon():
    cwc = compute_cwc(rect_foot())
    sp = static_polygon(cwc, MASS)
    inner = build_tube([-0.02, 0.0, 0.7], [0.02, 0.0, 0.75], radius=0.04)
    tc = tube_cone(cwc, inner)
    assert tc.kind == "cone"
    for v in inner.vertices:
        assert sp.contains(v[:2])
    ok, slacks = cone_membership(tc, [0, 0, 0])
    assert ok and slacks.max() < 0


def test_below_apex_rejected():
    cwc = compute_cwc(rect_foot())
    tc = tube_cone(cwc, build_tube([0, 0, 0.7], [0.03, 0, 0.72], radius=0.03))
    ok, _ = cone_membership(tc, [0, 0, -GRAVITY - 1.0])
    assert not ok


def test_reduction_ratio_on_double_support():
    rng = np.random.default_rng(46)
    ratios = []
    for _ in range(10):
        cs = random_stance(rng, n_patches=2, tilt=0.3)
        cwc = compute_cwc(cs)
        sp = static_polygon(cwc, MASS)
        if sp.kind != "polygon":
            continue
        c = np.append(sp.chebyshev, 0.8)
        tube = build_tube(c - [0.01, 0, 0], c + [0.01, 0, 0.01], radius=0.03)
        tc = tube_cone(cwc, tube)
        if tc.kind != "cone":
            continue
        ratios.append(tc.raw_rows / tc.reduced_rows)
    assert len(ratios) >= 5
    assert min(ratios) >= 10.0
