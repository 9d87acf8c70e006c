"""Stability regions of a stance: static-equilibrium polygon, pendular ZMP
support area and the 3D cone of feasible COM accelerations.

All three objects are reductions of the same wrench-cone row data.  With
rows transported to the COM, a_G = (a_i, b_i, -sigma):

* static equilibrium at (x, y) holds iff sigma(x, y) >= 0 for every row
  (sigma is the signed distance to the supporting line of a polygon edge);
* the ZMP area divides rows by h * sigma to reach a polar form around the
  COM's horizontal projection (h is the ZMP-plane offset, either sign);
* the acceleration cone divides by sigma alone: its cross-sections scale
  linearly with (g + zdd), giving an upward cone with apex (0, 0, -g) and
  rays (x_i, y_i, 1) read off one 2D convex hull.

Everything here is therefore one hull away from the cached wrench cone,
which is what makes per-COM recomputation cheap inside a control loop.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contacts import ContactSet, WrenchCone, grasp_matrix, linearize_friction
from .polyhedra import (
    DegenerateHull,
    HPolytope,
    PolarUnbounded,
    VPolytope,
    canonical_ccw,
    chebyshev_center,
    convex_hull_2d,
    polar_vertex_enum,
)
from .solvers import LPStatus, lp_solve

__all__ = [
    "GRAVITY",
    "GRAVITY_VEC",
    "StaticPolygon",
    "ZmpArea",
    "AccelCone",
    "static_polygon",
    "slackness",
    "zmp_area",
    "accel_cone",
    "upward_cone_hrep",
    "bretl_lall_polygon",
]

GRAVITY = 9.81
GRAVITY_VEC = np.array([0.0, 0.0, -GRAVITY])

#: Strict-interior margin on sigma below which region construction degrades.
EPS_SIGMA = 1e-9


def sigma_halfplanes(w: WrenchCone) -> HPolytope:
    """Static-equilibrium rows over (x, y): sigma = b - A (x,y) per CWC row."""
    a1, a2 = w.force_block, w.moment_block
    A = np.column_stack([-a2[:, 1], a2[:, 0]])
    b = -a1[:, 2]
    return HPolytope(A, b)


@dataclass(frozen=True)
class StaticPolygon:
    """Horizontal COM positions where static equilibrium is sustainable.

    ``halfplanes`` keeps one row per wrench-cone row (the sigma system);
    ``polygon`` is the minimal vertex form when the region is fullable,
    otherwise ``kind`` reports point/segment/empty degeneracy.
    """

    kind: str
    halfplanes: HPolytope
    polygon: VPolytope | None = None
    chebyshev: np.ndarray | None = None
    degenerate: np.ndarray | None = None

    def contains(self, xy, margin: float = 0.0) -> bool:
        if self.kind == "empty":
            return False
        return bool(slackness(self, xy).min() > margin)


def static_polygon(w: WrenchCone, mass: float = 1.0) -> StaticPolygon:
    """Static-equilibrium polygon of a stance.

    ``mass`` is accepted only to make the invariance explicit: the region
    does not depend on it (the gravity wrench scales out of the homogeneous
    cone rows).
    """
    if not mass > 0:
        raise ValueError("mass must be positive")
    hp = sigma_halfplanes(w)
    norms = np.linalg.norm(hp.A, axis=1)
    vacuous = norms <= 1e-12
    no_interior = False
    if vacuous.any():
        consts = hp.b[vacuous]
        if (consts < -1e-12).any():
            return StaticPolygon(kind="empty", halfplanes=hp)
        if (consts <= 1e-12).any():
            # A row with sigma == 0 everywhere: the region has no interior.
            no_interior = True
    work = HPolytope(hp.A[~vacuous], hp.b[~vacuous])
    cr = chebyshev_center(work)
    if cr is None:
        return StaticPolygon(kind="empty", halfplanes=hp)
    center, radius = cr
    if radius <= EPS_SIGMA or no_interior:
        pts = _extent_points(work, center)
        if pts is None:
            return StaticPolygon(kind="empty", halfplanes=hp)
        kind = "point" if pts.shape[0] == 1 else "segment"
        return StaticPolygon(kind=kind, halfplanes=hp, chebyshev=pts.mean(axis=0), degenerate=pts)
    b_c = work.b - work.A @ center
    poly = polar_vertex_enum(work.A / b_c[:, None])
    if isinstance(poly, PolarUnbounded):
        raise RuntimeError("static-equilibrium region is unbounded for this stance")
    verts = canonical_ccw(poly.vertices + center)
    return StaticPolygon(kind="polygon", halfplanes=hp, polygon=VPolytope(verts), chebyshev=center)


def _extent_points(work: HPolytope, center: np.ndarray):
    """Point or segment spanned by a zero-radius feasible set."""
    sols = []
    for d in (np.array([1.0, 0]), np.array([0, 1.0]), np.array([1.0, 1.0])):
        for sgn in (1.0, -1.0):
            res = lp_solve(sgn * d, A_ub=work.A, b_ub=work.b)
            if res.status is not LPStatus.OPTIMAL:
                return None
            sols.append(res.x)
    sols = np.array(sols)
    spread = sols.max(axis=0) - sols.min(axis=0)
    if spread.max() <= 1e-8:
        return sols.mean(axis=0)[None, :]
    i, j = np.unravel_index(
        np.argmax([[np.linalg.norm(p - q) for q in sols] for p in sols]), (len(sols), len(sols))
    )
    return np.array([sols[i], sols[j]])


def slackness(sp: StaticPolygon, xy) -> np.ndarray:
    """Per-row sigma values at (x, y); all positive iff strictly inside."""
    return sp.halfplanes.slack(xy)


@dataclass(frozen=True)
class ZmpArea:
    """Pendular ZMP support area in the plane z = z_plane.

    ``h`` is the signed plane offset z_plane - z_com (negative for a ZMP
    below the COM, the usual walking case); the polar scaling absorbs the
    sign.  ``kind`` is "area", "empty" (COM not strictly inside the static
    polygon), "degenerate_height" (h == 0) or "unbounded".
    """

    kind: str
    com: np.ndarray
    h: float
    polygon: VPolytope | None = None
    b_zmp: np.ndarray | None = None

    def contains(self, xy, tol: float = 1e-9) -> bool:
        if self.kind != "area":
            return False
        delta = np.asarray(xy, dtype=float) - self.com[:2]
        return bool((self.b_zmp @ delta).max() <= 1.0 + tol)


def zmp_area(w: WrenchCone, com, z_plane: float) -> ZmpArea:
    """Feasible ZMP positions under fixed-normal-force, zero-moment motion.

    Rows (a_i, b_i) are divided by h * sigma to reach the polar form around
    the COM projection; the hull of those polar points enumerates the area's
    vertices.  Requires the COM strictly inside the static polygon.
    """
    com = np.asarray(com, dtype=float)
    rows = w.row_moments_at(com)
    sig = -rows[:, 2]
    h = float(z_plane - com[2])
    if sig.min() <= EPS_SIGMA:
        return ZmpArea(kind="empty", com=com, h=h)
    if abs(h) < 1e-12:
        return ZmpArea(kind="degenerate_height", com=com, h=h)
    B = rows[:, :2] / (h * sig[:, None])
    live = np.linalg.norm(B, axis=1) > 1e-12
    poly = polar_vertex_enum(B[live])
    if isinstance(poly, PolarUnbounded):
        return ZmpArea(kind="unbounded", com=com, h=h, b_zmp=B[live])
    verts = canonical_ccw(poly.vertices + com[:2])
    return ZmpArea(kind="area", com=com, h=h, polygon=VPolytope(verts), b_zmp=B[live])


@dataclass(frozen=True)
class AccelCone:
    """Upward cone of feasible COM accelerations at a given COM position.

    V-form: apex (0, 0, -g) plus rays (x_i, y_i, 1).  H-form: rows act on
    the acceleration directly, A u <= b with b = A . gravity, so membership
    checks are a single matrix product.  ``kind`` is "empty" when the COM is
    not strictly inside the static polygon (zero acceleration is then not an
    interior point and the polar reduction does not apply).
    """

    kind: str
    com: np.ndarray
    rays: np.ndarray | None = None
    apex: np.ndarray = field(default_factory=lambda: GRAVITY_VEC.copy())
    A: np.ndarray | None = None
    b: np.ndarray | None = None

    def membership(self, accel, tol: float = 1e-9):
        if self.kind != "cone":
            return False, None
        slacks = self.A @ np.asarray(accel, dtype=float) - self.b
        return bool(slacks.max() <= tol), slacks


def upward_cone_hrep(rays_ccw: np.ndarray) -> np.ndarray:
    """Facet rows of the cone spanned by upward rays with a CCW cross-section.

    Adjacent ray pairs span the facets; row signs are fixed so the mean ray
    is strictly inside.  Rows are unit-normalized.
    """
    R = np.asarray(rays_ccw, dtype=float)
    mean = R.mean(axis=0)
    rows = []
    for k in range(R.shape[0]):
        n = np.cross(R[k], R[(k + 1) % R.shape[0]])
        n /= np.linalg.norm(n)
        if n @ mean > 0:
            n = -n
        rows.append(n)
    return np.array(rows)


def accel_cone(w: WrenchCone, com) -> AccelCone:
    """Cone of COM accelerations compatible with the stance at this COM.

    One convex hull on the sigma-scaled row points gives both the ray form
    and the minimal facet form.  Cross-sections at height zdd are the polar
    polygon scaled by (g + zdd).
    """
    com = np.asarray(com, dtype=float)
    rows = w.row_moments_at(com)
    sig = -rows[:, 2]
    if sig.min() <= EPS_SIGMA:
        return AccelCone(kind="empty", com=com)
    B = rows[:, :2] / sig[:, None]
    live = np.linalg.norm(B, axis=1) > 1e-12
    poly = polar_vertex_enum(B[live])
    if isinstance(poly, (PolarUnbounded, DegenerateHull)):
        raise RuntimeError("acceleration cross-section unbounded: stance outside supported scope")
    rays = np.hstack([poly.vertices, np.ones((poly.vertices.shape[0], 1))])
    A = upward_cone_hrep(rays)
    b = A @ GRAVITY_VEC
    return AccelCone(kind="cone", com=com, rays=rays, A=A, b=b)


# --- Iterative-projection oracle ------------------------------------------


def _support_lp(cs: ContactSet, mass: float, direction: np.ndarray):
    """Farthest static-equilibrium COM position along ``direction``.

    LP over stacked contact forces and the COM position, with force balance
    against gravity and the moment balance that couples forces to (x, y).
    """
    K = len(cs)
    nvar = 3 * K + 2
    G = grasp_matrix(cs, np.zeros(3))
    mg = mass * GRAVITY
    A_eq = np.zeros((6, nvar))
    A_eq[:, : 3 * K] = G
    b_eq = np.zeros(6)
    b_eq[2] = mg
    # Moment balance: sum C_i x f_i = mg * (y, -x, 0).
    A_eq[3, 3 * K + 1] = -mg
    A_eq[4, 3 * K] = mg
    rows = []
    for i, c in enumerate(cs.contacts):
        F = linearize_friction(c).halfspaces
        blk = np.zeros((F.shape[0], nvar))
        blk[:, 3 * i : 3 * i + 3] = F
        rows.append(blk)
    A_ub = np.vstack(rows)
    cost = np.zeros(nvar)
    cost[3 * K : 3 * K + 2] = -direction
    res = lp_solve(cost, A_ub=A_ub, b_ub=np.zeros(A_ub.shape[0]), A_eq=A_eq, b_eq=b_eq)
    if res.status is LPStatus.INFEASIBLE:
        return None
    if res.status is LPStatus.UNBOUNDED:
        raise RuntimeError("unbounded static-equilibrium region in support query")
    return res.x[3 * K : 3 * K + 2]


def bretl_lall_polygon(cs: ContactSet, mass: float = 1.0, area_tol: float = 1e-6, max_iter: int = 200):
    """Static-equilibrium polygon by iterative support-direction expansion.

    Independent of the wrench-cone pipeline: each vertex comes from one
    support LP over the raw force variables.  Directions start on the axes
    and the edge with the largest inner/outer area gap is bisected until the
    total gap falls below ``area_tol``.  Returns a (possibly 1- or 2-vertex)
    VPolytope, or ``None`` when no equilibrium exists.
    """
    dirs = [np.array([1.0, 0]), np.array([0, 1.0]), np.array([-1.0, 0]), np.array([0, -1.0])]
    pts = []
    for d in dirs:
        p = _support_lp(cs, mass, d)
        if p is None:
            return None
        pts.append(p)
    support = list(zip(dirs, pts))

    def gap_area(a, b):
        (da, pa), (db, pb) = a, b
        den = da[0] * db[1] - da[1] * db[0]
        if abs(den) < 1e-12:
            return 0.0, None
        q = np.linalg.solve(np.array([da, db]), np.array([da @ pa, db @ pb]))
        area = 0.5 * abs((pb[0] - pa[0]) * (q[1] - pa[1]) - (pb[1] - pa[1]) * (q[0] - pa[0]))
        return area, q

    # Refine the edge with the largest inner/outer gap triangle.  Coincident
    # support points (ties spanning a vertex) have zero gap and resolve
    # themselves, so degenerate regions terminate with zero total gap.
    for _ in range(max_iter):
        gaps = []
        for k in range(len(support)):
            a, b = support[k], support[(k + 1) % len(support)]
            gaps.append(gap_area(a, b)[0])
        total = sum(gaps)
        if total < area_tol:
            break
        k = int(np.argmax(gaps))
        pa = support[k][1]
        pb = support[(k + 1) % len(support)][1]
        edge = pb - pa
        d_new = np.array([edge[1], -edge[0]])
        nd = np.linalg.norm(d_new)
        if nd < 1e-12:
            break
        d_new /= nd
        p_new = _support_lp(cs, mass, d_new)
        support.insert(k + 1, (d_new, p_new))

    hull = convex_hull_2d(np.array([p for _, p in support]))
    if isinstance(hull, DegenerateHull):
        return VPolytope(hull.points)
    return hull
