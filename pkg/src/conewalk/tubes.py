"""Trajectory tubes and the tube-wide contact-stability cone.

A tube is a polyhedral cylinder with square cross-sections around a COM
path segment.  Stacking the per-vertex acceleration-cone rows of the
stance's wrench cone gives the halfspace form of the intersection of the
acceleration cones over the *whole* tube: any acceleration satisfying all
stacked rows is feasible at every point of the tube (negativity of each
term of a convex combination).  The stacked matrix is massively redundant;
one polar 2D hull reduces it to a handful of facets, which is what makes
the preview problem small.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contacts import WrenchCone
from .polyhedra import HPolytope, PolarUnbounded, chebyshev_center, cone_v_to_h, polar_vertex_enum
from .regions import EPS_SIGMA, GRAVITY_VEC, upward_cone_hrep

__all__ = ["Tube", "TubeCone", "build_tube", "extend_tube", "tube_cone", "cone_membership"]

DEFAULT_RADIUS = 0.05  # m, robustness radius of the square cross-sections


def _segment_frame(direction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic square-cross-section axes perpendicular to a segment."""
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(direction @ ref)) > 0.99:
        ref = np.array([0.0, 1.0, 0.0])
    t1 = ref - (ref @ direction) * direction
    t1 /= np.linalg.norm(t1)
    return t1, np.cross(direction, t1)


@dataclass(frozen=True)
class Tube:
    """Polyhedral cylinder around a COM path segment.

    ``vertices`` are the corner points whose acceleration cones get
    intersected; ``hrep`` is the facet form A x <= b; ``p_form`` holds the
    normalized P (x - center) <= 1 view centered on the segment midpoint.
    """

    vertices: np.ndarray
    hrep: HPolytope
    radius: float
    segment: tuple[np.ndarray, np.ndarray]
    P: np.ndarray = field(repr=False, default=None)
    center: np.ndarray = field(repr=False, default=None)

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.hrep.contains(x, tol=tol)


def _finish_tube(vertices: np.ndarray, radius: float, p0, pT) -> Tube:
    lifted = np.hstack([vertices, np.ones((vertices.shape[0], 1))])
    rows4 = cone_v_to_h(lifted)
    # Rows (n, c): n.x + c*t <= 0 on the lift; the polytope facet is n.x <= -c.
    keep = np.linalg.norm(rows4[:, :3], axis=1) > 1e-12
    A = rows4[keep, :3]
    b = -rows4[keep, 3]
    center = (np.asarray(p0, dtype=float) + np.asarray(pT, dtype=float)) / 2.0
    margins = b - A @ center
    if margins.min() <= 1e-12:
        raise RuntimeError("tube midpoint not strictly inside its own hull")
    P = A / margins[:, None]
    return Tube(
        vertices=vertices,
        hrep=HPolytope(A, b),
        radius=radius,
        segment=(np.asarray(p0, dtype=float), np.asarray(pT, dtype=float)),
        P=P,
        center=center,
    )


def build_tube(p0, pT, radius: float = DEFAULT_RADIUS) -> Tube:
    """Square-cross-section tube containing the segment [p0, pT].

    Two squares of half-width ``radius`` sit perpendicular to the segment at
    its endpoints; a degenerate segment produces an axis-aligned cube of the
    same half-width.  The facet form comes from the double description of
    the corner set.
    """
    if not radius > 0:
        raise ValueError("tube radius must be positive")
    p0 = np.asarray(p0, dtype=float)
    pT = np.asarray(pT, dtype=float)
    axis = pT - p0
    length = float(np.linalg.norm(axis))
    if length < 1e-9:
        t1 = np.array([1.0, 0, 0])
        t2 = np.array([0, 1.0, 0])
        t3 = np.array([0, 0, 1.0])
        corners = [
            p0 + radius * (sx * t1 + sy * t2 + sz * t3)
            for sx in (1, -1)
            for sy in (1, -1)
            for sz in (1, -1)
        ]
        return _finish_tube(np.array(corners), radius, p0, pT)
    d = axis / length
    t1, t2 = _segment_frame(d)
    square = [radius * (sx * t1 + sy * t2) for sx, sy in ((1, 1), (1, -1), (-1, -1), (-1, 1))]
    corners = [p0 + s for s in square] + [pT + s for s in square]
    return _finish_tube(np.array(corners), radius, p0, pT)


def extend_tube(tube: Tube, pT_new) -> Tube:
    """Larger tube sharing the given tube's vertices, extended to pT_new.

    The result is the hull of the original corner set plus an end square at
    ``pT_new``; with the new endpoint along the original axis this is the
    longer cylinder, and the shared vertices let the stacked cone rows of
    the inner tube be reused inside the outer one.
    """
    p0, pT = tube.segment
    pT_new = np.asarray(pT_new, dtype=float)
    axis = pT_new - p0
    length = float(np.linalg.norm(axis))
    if length < 1e-9:
        return tube
    d = axis / length
    t1, t2 = _segment_frame(d)
    square = [tube.radius * (sx * t1 + sy * t2) for sx, sy in ((1, 1), (1, -1), (-1, -1), (-1, 1))]
    vertices = np.vstack([tube.vertices, [pT_new + s for s in square]])
    return _finish_tube(vertices, tube.radius, p0, pT_new)


@dataclass(frozen=True)
class TubeCone:
    """Intersection of per-vertex acceleration cones over a tube.

    ``raw`` stacks one row block per tube vertex (acting on accel - gravity);
    ``reduced`` is the minimal facet form after the polar hull; ``rays``
    with apex at the gravity vector is the generator view.  ``kind`` is
    "empty" when the intersection has no interior (the tube is too wide or
    the stance too weak; the controller must shrink the tube or wait).  A
    nonempty cone need not contain zero acceleration: when part of the tube
    leaves the static-equilibrium polygon, what remains is a cone of
    tipping accelerations, which is exactly what carries a dynamic step.
    """

    kind: str
    raw: np.ndarray
    reduced: np.ndarray | None = None
    rays: np.ndarray | None = None
    apex: np.ndarray = field(default_factory=lambda: GRAVITY_VEC.copy())

    @property
    def raw_rows(self) -> int:
        return self.raw.shape[0]

    @property
    def reduced_rows(self) -> int:
        return 0 if self.reduced is None else self.reduced.shape[0]


def tube_cone(w: WrenchCone, tube: Tube) -> TubeCone:
    """Stack per-vertex cone rows and reduce them with one polar hull.

    Row block j is the wrench-cone row set transported to tube vertex j,
    acting on (accel - gravity).  Scaling out the vertical coordinate turns
    the stack into a 2D halfplane system over the normalized horizontal
    acceleration; when its origin is not interior (some row's sigma is
    nonpositive) the system is first centered on its Chebyshev center.  The
    hull of the polar points then yields the cone's rays and minimal facet
    form.
    """
    blocks = [w.row_moments_at(v) for v in tube.vertices]
    raw = np.vstack(blocks)
    sig = -raw[:, 2]
    B = raw[:, :2]
    norms = np.linalg.norm(B, axis=1)
    vacuous = norms <= 1e-12
    if (sig[vacuous] < -EPS_SIGMA).any():
        return TubeCone(kind="empty", raw=raw)
    B, sig_live = B[~vacuous], sig[~vacuous]

    if sig_live.min() > 1e-6:
        center = np.zeros(2)
        margins = sig_live
    else:
        cr = chebyshev_center(HPolytope(B, sig_live))
        if cr is None or cr[1] <= EPS_SIGMA:
            return TubeCone(kind="empty", raw=raw)
        center = cr[0]
        margins = sig_live - B @ center
    poly = polar_vertex_enum(B / margins[:, None])
    if isinstance(poly, PolarUnbounded):
        raise RuntimeError("tube cone cross-section unbounded: stance outside supported scope")
    verts = poly.vertices + center
    rays = np.hstack([verts, np.ones((verts.shape[0], 1))])
    reduced = upward_cone_hrep(rays)
    return TubeCone(kind="cone", raw=raw, reduced=reduced, rays=rays)


def cone_membership(tc: TubeCone, accel, tol: float = 1e-9):
    """Verdict and per-facet slacks of an acceleration against the cone."""
    if tc.kind != "cone":
        return False, None
    slacks = tc.reduced @ (np.asarray(accel, dtype=float) - GRAVITY_VEC)
    return bool(slacks.max() <= tol), slacks
