"""Polyhedral kernel: 2D hulls, polar vertex enumeration, Chebyshev
centering and the double description method for cones.

Conventions.  Polytopes are ``{x : A x <= b}`` (H-form) or convex hulls of
vertices plus rays (V-form).  Cones are homogeneous: ``{x : A x <= 0}`` or
``rays({r_i}) + lin({l_j})``.  2D polygon vertex lists are counter-clockwise
and duplicate-free.  Degenerate and unbounded inputs produce typed results
rather than exceptions, because single-point regions are legitimate inputs
downstream (a point contact has a one-point equilibrium region).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .solvers import EPS_LP, LPStatus, lp_solve

__all__ = [
    "EPS_HULL",
    "HPolytope",
    "VPolytope",
    "PolyCone",
    "DegenerateHull",
    "PolarUnbounded",
    "ConditioningWarning",
    "convex_hull_2d",
    "polar_vertex_enum",
    "chebyshev_center",
    "hpolytope_vertices",
    "double_description",
    "cone_h_to_v",
    "cone_v_to_h",
    "minimal_hrep_cone",
    "cone_contains_h",
    "cone_contains_v",
    "polygon_area",
    "canonical_ccw",
    "point_in_polygon",
    "convex_hausdorff",
]

#: Collinearity tolerance for 2D hulls (cross products, scaled by extent^2).
EPS_HULL = 1e-10


class ConditioningWarning(UserWarning):
    """Raised when a cone conversion hits a numerically marginal pivot."""


@dataclass(frozen=True)
class HPolytope:
    """Halfspace form {x : A x <= b}."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(-1))
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("row count mismatch between A and b")

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def slack(self, x) -> np.ndarray:
        return self.b - self.A @ np.asarray(x, dtype=float)

    def contains(self, x, tol=EPS_LP) -> bool:
        return bool(self.slack(x).min() >= -tol)


@dataclass(frozen=True)
class VPolytope:
    """Vertex form conv(vertices) + rays(rays)."""

    vertices: np.ndarray
    rays: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "vertices", v)
        r = np.asarray(self.rays, dtype=float)
        if r.size == 0:
            r = np.zeros((0, v.shape[1]))
        object.__setattr__(self, "rays", np.atleast_2d(r))

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]


@dataclass(frozen=True)
class DegenerateHull:
    """Hull of points that are all coincident (1 point) or collinear (2)."""

    points: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=float)))

    @property
    def kind(self) -> str:
        return "point" if self.points.shape[0] == 1 else "segment"


@dataclass(frozen=True)
class PolarUnbounded:
    """Polar enumeration hit an unbounded polygon; carries open directions."""

    directions: np.ndarray


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _dedupe_sorted(points: np.ndarray, tol: float) -> np.ndarray:
    keep = [points[0]]
    for p in points[1:]:
        if np.abs(p - keep[-1]).max() > tol:
            keep.append(p)
    return np.array(keep)


def convex_hull_2d(points, eps: float = EPS_HULL):
    """Counter-clockwise convex hull of 2D points (monotone chain).

    Points within ``eps``-scaled collinearity of a hull edge are dropped, so
    no three retained vertices are collinear.  Returns a 2D
    :class:`VPolytope`, or a :class:`DegenerateHull` when the input is a
    single point or a collinear set.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 1 or pts.shape[1] != 2:
        raise ValueError("need at least one 2D point")
    scale = max(1.0, float(np.abs(pts).max()))
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = _dedupe_sorted(pts[order], 1e-12 * scale)
    if pts.shape[0] == 1:
        return DegenerateHull(pts)

    def turn_eps(u, v):
        # Relative collinearity: an angular tolerance, so mixed-magnitude
        # point sets (e.g. polar rows near a thin polygon) keep their shape.
        return eps * float(np.linalg.norm(u)) * float(np.linalg.norm(v))

    def chain(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                u, v = out[-1] - out[-2], p - out[-1]
                if _cross2(u, v) > turn_eps(u, v):
                    break
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if hull.shape[0] < 3:
        # All points collinear: extremes of the sorted order are the segment.
        return DegenerateHull(np.array([pts[0], pts[-1]]))
    return VPolytope(canonical_ccw(hull))


def canonical_ccw(vertices: np.ndarray) -> np.ndarray:
    """CCW orientation, starting from the lexicographically smallest vertex."""
    if polygon_area(vertices) < 0:
        vertices = vertices[::-1]
    start = np.lexsort((vertices[:, 1], vertices[:, 0]))[0]
    return np.roll(vertices, -start, axis=0)


def polygon_area(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def point_in_polygon(vertices: np.ndarray, p, tol: float = 1e-9) -> bool:
    """Membership in a CCW convex polygon (boundary counts as inside)."""
    v = np.asarray(vertices, dtype=float)
    p = np.asarray(p, dtype=float)
    nxt = np.roll(v, -1, axis=0)
    cross = (nxt[:, 0] - v[:, 0]) * (p[1] - v[:, 1]) - (nxt[:, 1] - v[:, 1]) * (p[0] - v[:, 0])
    return bool(cross.min() >= -tol)


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0.0 else np.clip((p - a) @ ab / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def _point_polygon_distance(p, vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    if v.shape[0] == 1:
        return float(np.linalg.norm(p - v[0]))
    if v.shape[0] == 2:
        return _point_segment_distance(p, v[0], v[1])
    if point_in_polygon(v, p, tol=0.0):
        return 0.0
    return min(_point_segment_distance(p, v[i], v[(i + 1) % len(v)]) for i in range(len(v)))


def convex_hausdorff(verts_p, verts_q) -> float:
    """Hausdorff distance between convex polygons given by vertex arrays.

    Exact for convex sets: the maximum point-to-set distance is attained at
    a vertex.  Accepts degenerate 1- or 2-vertex inputs.
    """
    P = np.atleast_2d(np.asarray(verts_p, dtype=float))
    Q = np.atleast_2d(np.asarray(verts_q, dtype=float))
    d_pq = max(_point_polygon_distance(p, Q) for p in P)
    d_qp = max(_point_polygon_distance(q, P) for q in Q)
    return max(d_pq, d_qp)


def _recession_directions(B: np.ndarray) -> np.ndarray:
    """Extreme directions of {d : B d <= 0} in 2D (diagnostic payload)."""
    angles = np.sort(np.arctan2(B[:, 1], B[:, 0]))
    gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
    i = int(np.argmax(gaps))
    if gaps[i] < np.pi - 1e-12:
        return np.zeros((0, 2))
    lo, hi = angles[i], angles[i] + gaps[i]
    # Open directions are at >= 90 degrees from every row normal.
    d1, d2 = lo + np.pi / 2, hi - np.pi / 2
    out = [(np.cos(a), np.sin(a)) for a in (d1, d2)]
    return np.unique(np.round(out, 12), axis=0)


def polar_vertex_enum(B, eps: float = EPS_HULL):
    """Vertices of the polygon {x : B x <= 1} via its polar hull.

    The rows of ``B`` are hulled as 2D points; the cyclic order of extreme
    points is the adjacency order of the polygon's edges, so intersecting
    consecutive supporting lines yields the vertex list in O(h log v).
    Requires the origin strictly inside the polygon (all-ones right-hand
    side); otherwise a :class:`PolarUnbounded` result is returned.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[1] != 2:
        raise ValueError("polar enumeration is 2D only")
    hull = convex_hull_2d(B, eps=eps)
    if isinstance(hull, DegenerateHull):
        return PolarUnbounded(_recession_directions(B))
    hv = hull.vertices
    nxt = np.roll(hv, -1, axis=0)
    # Origin strictly inside the polar hull <=> the primal polygon is bounded.
    cross = hv[:, 0] * nxt[:, 1] - hv[:, 1] * nxt[:, 0]
    pair_scale = np.linalg.norm(hv, axis=1) * np.linalg.norm(nxt, axis=1)
    if (cross <= 1e-12 * np.maximum(1.0, pair_scale)).any():
        return PolarUnbounded(_recession_directions(B))
    verts = []
    for bi, bj in zip(hv, nxt):
        M = np.array([bi, bj])
        verts.append(np.linalg.solve(M, np.ones(2)))
    verts = np.array(verts)
    # Concurrent supporting lines produce repeated vertices; drop them.
    keep = [verts[0]]
    vscale = max(1.0, float(np.abs(verts).max()))
    for v in verts[1:]:
        if np.abs(v - keep[-1]).max() > 1e-12 * vscale:
            keep.append(v)
    if len(keep) > 1 and np.abs(keep[0] - keep[-1]).max() <= 1e-12 * vscale:
        keep.pop()
    return VPolytope(canonical_ccw(np.array(keep)))


def chebyshev_center(poly: HPolytope):
    """Center and radius of the largest ball inscribed in {A x <= b}.

    One LP.  Returns ``(center, radius)``, or ``None`` when the polytope is
    empty.  Raises ``ValueError`` when the inscribed radius is unbounded
    (callers in this package only feed bounded regions).
    """
    A, b = poly.A, poly.b
    norms = np.linalg.norm(A, axis=1)
    live = norms > 1e-14
    if bool((b[~live] < -EPS_LP).any()):
        return None
    A, b, norms = A[live], b[live], norms[live]
    d = poly.dim
    if A.shape[0] == 0:
        raise ValueError("chebyshev_center: unbounded (no effective rows)")
    c = np.zeros(d + 1)
    c[-1] = -1.0
    A_lp = np.hstack([A, norms[:, None]])
    bounds = [(None, None)] * d + [(0, None)]
    res = lp_solve(c, A_ub=A_lp, b_ub=b, bounds=bounds)
    if res.status is LPStatus.INFEASIBLE:
        return None
    if res.status is LPStatus.UNBOUNDED:
        raise ValueError("chebyshev_center: inscribed radius unbounded")
    return res.x[:d], float(res.x[d])


def hpolytope_vertices(poly: HPolytope, eps: float = EPS_HULL):
    """Vertex enumeration of a bounded 2D polytope {A x <= b}.

    Chebyshev-centers the system to put the origin strictly inside, divides
    through to the all-ones form and applies :func:`polar_vertex_enum`.
    Returns a :class:`VPolytope`, a :class:`DegenerateHull` (point/segment
    feasible set), ``None`` for an empty system, or :class:`PolarUnbounded`.
    """
    cr = chebyshev_center(poly)
    if cr is None:
        return None
    center, radius = cr
    if radius <= 1e-9:
        return _degenerate_extent(poly, center)
    b_c = poly.b - poly.A @ center
    B = poly.A / b_c[:, None]
    inner = polar_vertex_enum(B, eps=eps)
    if isinstance(inner, PolarUnbounded):
        return inner
    return VPolytope(canonical_ccw(inner.vertices + center))


def _degenerate_extent(poly: HPolytope, center: np.ndarray):
    """Classify a zero-radius feasible set as a point or a segment."""
    lo, hi = [], []
    for k in range(2):
        c = np.zeros(2)
        c[k] = 1.0
        rmin = lp_solve(c, A_ub=poly.A, b_ub=poly.b)
        rmax = lp_solve(-c, A_ub=poly.A, b_ub=poly.b)
        if not (rmin.optimal and rmax.optimal):
            return None
        lo.append(rmin.value)
        hi.append(-rmax.value)
    lo, hi = np.array(lo), np.array(hi)
    if (hi - lo).max() <= 1e-8:
        return DegenerateHull((lo + hi)[None, :] / 2.0)
    axis = np.argmax(hi - lo)
    d = np.zeros(2)
    d[axis] = 1.0
    p_lo = lp_solve(d, A_ub=poly.A, b_ub=poly.b).x
    p_hi = lp_solve(-d, A_ub=poly.A, b_ub=poly.b).x
    return DegenerateHull(np.array([p_lo, p_hi]))


# --- Double description --------------------------------------------------


@dataclass(frozen=True)
class PolyCone:
    """Homogeneous cone with optional halfspace and generator forms.

    H-form: {x : normals @ x <= 0}.  V-form: rays({rays}) + lin({lineality}).
    """

    dim: int
    normals: np.ndarray | None = None
    rays: np.ndarray | None = None
    lineality: np.ndarray | None = None

    @staticmethod
    def from_h(normals) -> "PolyCone":
        A = np.atleast_2d(np.asarray(normals, dtype=float))
        return PolyCone(dim=A.shape[1], normals=A)

    @staticmethod
    def from_v(rays, lineality=None) -> "PolyCone":
        R = np.atleast_2d(np.asarray(rays, dtype=float))
        L = None if lineality is None else np.atleast_2d(np.asarray(lineality, dtype=float))
        return PolyCone(dim=R.shape[1], rays=R, lineality=L)


def _unit_rows(M: np.ndarray, drop_zero=True) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    norms = np.linalg.norm(M, axis=1)
    if drop_zero:
        M = M[norms > 1e-14]
        norms = norms[norms > 1e-14]
    return M / norms[:, None]


def _dedupe_directions(rows: np.ndarray, tol=1e-9) -> np.ndarray:
    out: list[np.ndarray] = []
    for r in rows:
        if not any(float(r @ o) > 1.0 - tol for o in out):
            out.append(r)
    return np.array(out) if out else np.zeros((0, rows.shape[1]))


def cone_h_to_v(A, eps: float = 1e-9):
    """Generators of {x : A x <= 0}: incremental double description.

    Returns ``(rays, lineality)`` with unit rows; the ray set is minimal
    (extreme rays only).  Adjacency of a positive/negative ray pair is
    decided by the rank of their common tight-constraint rows (must equal
    the pointed dimension minus two), which stays reliable on nearly
    degenerate inputs where combinatorial zero-set tests mislead.  Marginal
    pivots raise a ConditioningWarning but still produce a result.
    """
    A = _unit_rows(A)
    if A.size == 0:
        raise ValueError("cone_h_to_v: need at least one nonzero row")
    d = A.shape[1]
    lin: list[np.ndarray] = [np.eye(d)[i] for i in range(d)]
    rays: list[np.ndarray] = []
    zsets: list[set[int]] = []  # indices of processed rows tight at each ray
    processed: list[np.ndarray] = []

    def tight_set(r: np.ndarray) -> set[int]:
        if not processed:
            return set()
        dots = np.array(processed) @ r
        return {i for i, v in enumerate(dots) if abs(v) <= eps}

    for a in A:
        dlin = np.array([float(l @ a) for l in lin]) if lin else np.zeros(0)
        if lin and np.abs(dlin).max() > eps:
            i0 = int(np.argmax(np.abs(dlin)))
            if np.abs(dlin).max() < 1e-7:
                warnings.warn("marginal lineality pivot in double description", ConditioningWarning)
            l0, c0 = lin[i0], dlin[i0]
            lin = [l - (dl / c0) * l0 for k, (l, dl) in enumerate(zip(lin, dlin)) if k != i0]
            lin = [l / np.linalg.norm(l) for l in lin if np.linalg.norm(l) > 1e-14]
            new_rays = []
            for r in rays:
                rr = r - (float(r @ a) / c0) * l0
                n = np.linalg.norm(rr)
                if n > 1e-14:
                    new_rays.append(rr / n)
            rays = new_rays
            r0 = -np.sign(c0) * l0
            rays.append(r0 / np.linalg.norm(r0))
            processed.append(a)
            zsets = [tight_set(r) for r in rays]
            continue

        j = len(processed)
        processed.append(a)
        if not rays:
            zsets = []
            continue
        P = np.array(processed)
        dots = np.array([float(r @ a) for r in rays])
        neg = [i for i in range(len(rays)) if dots[i] < -eps]
        zero = [i for i in range(len(rays)) if abs(dots[i]) <= eps]
        pos = [i for i in range(len(rays)) if dots[i] > eps]
        if not pos:
            for i in zero:
                zsets[i].add(j)
            continue

        dim_eff = d - len(lin)
        min_common = max(0, dim_eff - 2)
        new_rays: list[np.ndarray] = []
        for ip in pos:
            for im in neg:
                common = zsets[ip] & zsets[im]
                if len(common) < min_common:
                    continue
                if min_common > 0:
                    rank = np.linalg.matrix_rank(P[sorted(common)], tol=1e-8)
                    if rank != dim_eff - 2:
                        continue
                r_new = dots[ip] * rays[im] - dots[im] * rays[ip]
                n = np.linalg.norm(r_new)
                if n > 1e-12:
                    new_rays.append(r_new / n)
        keep_idx = neg + zero
        merged = [rays[i] for i in keep_idx]
        merged_z = [zsets[i] | ({j} if i in zero else set()) for i in keep_idx]
        for r in new_rays:
            if any(float(r @ o) > 1.0 - 1e-9 for o in merged):
                continue
            merged.append(r)
            merged_z.append(tight_set(r))
        rays, zsets = merged, merged_z

    R = np.array(rays) if rays else np.zeros((0, d))
    L = np.array(lin) if lin else np.zeros((0, d))
    return R, L


def cone_v_to_h(rays, lineality=None, eps: float = 1e-9):
    """Minimal halfspace rows of rays({rays}) + lin({lineality}).

    Computed as the convex hull of the origin and the unit rays: hull facets
    through the origin are exactly the cone's facets.  The hull runs inside
    the cone's linear span (out-of-span directions become +-row equality
    pairs), and qhull's facet merging keeps the result reliable on the
    heavily degenerate generator sets that contact patches produce, where
    incremental float double description silently drops faces.
    """
    R = _unit_rows(rays)
    if R.size == 0:
        raise ValueError("cone_v_to_h: need at least one nonzero ray")
    d = R.shape[1]
    span_rows = [R]
    if lineality is not None and np.size(lineality) > 0:
        L = _unit_rows(lineality)
        span_rows += [L, -L]
    M = np.vstack(span_rows)
    _, svals, Vt = np.linalg.svd(M, full_matrices=True)
    rank = int((svals > eps * max(1.0, svals[0] if svals.size else 1.0)).sum())
    basis = Vt[:rank]
    complement = Vt[rank:]
    rows_out: list[np.ndarray] = []
    if complement.shape[0]:
        rows_out += [complement, -complement]

    P = M @ basis.T  # generators in span coordinates
    if rank == 0:
        return np.zeros((0, d))
    if rank == 1:
        t = P[:, 0]
        if t.max() > eps and t.min() < -eps:
            pass  # cone is the whole line inside its span: no facet there
        else:
            direction = np.sign(t[np.abs(t).argmax()])
            rows_out.append((-direction * np.ones((1, 1))) @ basis)
        return _dedupe_directions(np.vstack(rows_out)) if rows_out else np.zeros((0, d))

    lifted = np.vstack([np.zeros((1, rank)), P])
    origin_tol = 1e-9
    try:
        hull = ConvexHull(lifted, qhull_options="Qx" if rank > 4 else None)
    except QhullError:
        # Joggled retry: offsets of origin facets are then only joggle-exact.
        hull = ConvexHull(lifted, qhull_options="QJ1e-11")
        origin_tol = 1e-7
    eqs = hull.equations  # n . x + offset <= 0 inside
    through_origin = np.abs(eqs[:, -1]) <= origin_tol
    normals = eqs[through_origin, :-1]
    if normals.shape[0] == 0:
        return (
            _dedupe_directions(np.vstack(rows_out)) if rows_out else np.zeros((0, d))
        )
    facet_rows = _dedupe_directions(_unit_rows(normals)) @ basis
    rows_out.append(facet_rows)
    return _dedupe_directions(np.vstack(rows_out))


def double_description(cone: PolyCone, eps: float = 1e-10) -> PolyCone:
    """Fill in the missing representation of a cone (both become minimal)."""
    if cone.normals is not None and cone.rays is None:
        rays, lin = cone_h_to_v(cone.normals, eps=eps)
        return PolyCone(cone.dim, normals=cone.normals, rays=rays, lineality=lin)
    if cone.rays is not None and cone.normals is None:
        normals = cone_v_to_h(cone.rays, cone.lineality, eps=eps)
        return PolyCone(cone.dim, normals=normals, rays=cone.rays, lineality=cone.lineality)
    raise ValueError("double_description expects exactly one representation")


def minimal_hrep_cone(rows, tol: float = EPS_LP) -> np.ndarray:
    """LP redundancy pass: drop rows implied by the others.

    Row i is redundant iff max a_i.x over the remaining system (with the
    probe capped by a_i.x <= 1) cannot exceed zero.
    """
    rows = _unit_rows(rows)
    keep = np.ones(len(rows), dtype=bool)
    for i in range(len(rows)):
        others = rows[keep & (np.arange(len(rows)) != i)]
        if others.size == 0:
            continue
        A_lp = np.vstack([others, rows[i][None, :]])
        b_lp = np.concatenate([np.zeros(len(others)), [1.0]])
        res = lp_solve(-rows[i], A_ub=A_lp, b_ub=b_lp)
        if res.optimal and -res.value <= tol:
            keep[i] = False
    return rows[keep]


def cone_contains_h(rows, x, tol: float = EPS_LP) -> bool:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return bool((rows @ np.asarray(x, dtype=float)).max(initial=-np.inf) <= tol)


def cone_contains_v(rays, x, lineality=None, tol: float = EPS_LP) -> bool:
    """LP test: is x a conic combination of the rays (plus lineality)?"""
    R = np.atleast_2d(np.asarray(rays, dtype=float))
    x = np.asarray(x, dtype=float)
    blocks = [R.T]
    bounds = [(0, None)] * R.shape[0]
    if lineality is not None and np.size(lineality) > 0:
        L = np.atleast_2d(np.asarray(lineality, dtype=float))
        blocks.append(L.T)
        bounds += [(None, None)] * L.shape[0]
    A_eq = np.hstack(blocks)
    res = lp_solve(np.zeros(A_eq.shape[1]), A_eq=A_eq, b_eq=x, bounds=bounds)
    return res.optimal
