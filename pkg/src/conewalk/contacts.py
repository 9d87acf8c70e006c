"""Contacts, linearized friction cones, grasp matrix and the contact
wrench cone (CWC).

The CWC is generated by the pyramid edge forces of every contact: the ray
(f_e, (C_i - O) x f_e) in wrench space for contact point C_i and edge
direction f_e.  Converting this generator form to halfspace rows gives the
matrix whose rows are dual twists: a net contact wrench w_O is realizable
by feasible contact forces if and only if every row value is nonpositive.
The friction pyramid is the inner (conservative) approximation, so anything
accepted here is feasible under the exact second-order friction cone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import DualTwist, Screw
from .polyhedra import cone_v_to_h, minimal_hrep_cone
from .solvers import EPS_LP, lp_solve

__all__ = [
    "Contact",
    "ContactSet",
    "FrictionPyramid",
    "WrenchCone",
    "linearize_friction",
    "grasp_matrix",
    "compute_cwc",
    "cwc_membership",
    "wrench_realizable",
]


def tangent_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic orthonormal tangent pair (t1, t2) with t1 x t2 = n."""
    n = np.asarray(normal, dtype=float)
    ref = np.array([1.0, 0.0, 0.0])
    if abs(float(n @ ref)) > 0.99:
        ref = np.array([0.0, 1.0, 0.0])
    t1 = ref - (ref @ n) * n
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return t1, t2


@dataclass(frozen=True)
class Contact:
    """Unilateral point contact with Coulomb friction.

    ``edges`` is the linearization pyramid's edge count (4 by default).
    """

    position: np.ndarray
    normal: np.ndarray
    mu: float
    edges: int = 4

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "normal", np.asarray(self.normal, dtype=float))
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-12:
            raise ValueError("contact normal must be a unit vector")
        if not self.mu > 0:
            raise ValueError("friction coefficient must be positive")
        if self.edges < 3:
            raise ValueError("pyramid needs at least 3 edges")


@dataclass(frozen=True)
class ContactSet:
    contacts: tuple[Contact, ...]

    def __post_init__(self):
        object.__setattr__(self, "contacts", tuple(self.contacts))
        if len(self.contacts) < 1:
            raise ValueError("a contact set needs at least one contact")

    def __len__(self) -> int:
        return len(self.contacts)

    def positions(self) -> np.ndarray:
        return np.array([c.position for c in self.contacts])


@dataclass(frozen=True)
class FrictionPyramid:
    """Inner pyramid of a friction cone: edge rays and facet rows F f <= 0."""

    rays: np.ndarray
    halfspaces: np.ndarray


def linearize_friction(contact: Contact) -> FrictionPyramid:
    """Inner pyramid edges f_k = n + mu (cos a_k t1 + sin a_k t2).

    Edge tangential magnitude is exactly mu, so every conic combination has
    tangential-to-normal ratio at most mu: members always satisfy the exact
    friction cone.  For four edges this is the familiar n + (mu/sqrt 2)
    (+-t1 +-t2) set of diagonal generators.
    """
    n, mu, E = contact.normal, contact.mu, contact.edges
    t1, t2 = tangent_basis(n)
    angles = (2 * np.arange(E) + 1) * np.pi / E
    rays = n[None, :] + mu * (np.cos(angles)[:, None] * t1 + np.sin(angles)[:, None] * t2)
    rows = []
    for k in range(E):
        facet = np.cross(rays[k], rays[(k + 1) % E])
        facet /= np.linalg.norm(facet)
        if facet @ n > 0:
            facet = -facet
        rows.append(facet)
    return FrictionPyramid(rays=rays, halfspaces=np.array(rows))


def _cross_matrix(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def grasp_matrix(cs: ContactSet, origin) -> np.ndarray:
    """6 x 3K map from stacked contact forces to the net wrench at ``origin``.

    Block i is [I; [(C_i - O)]_x]: forces add up directly, moments pick up
    the lever arm of each contact point.
    """
    origin = np.asarray(origin, dtype=float)
    blocks = []
    for c in cs.contacts:
        arm = c.position - origin
        blocks.append(np.vstack([np.eye(3), _cross_matrix(arm)]))
    return np.hstack(blocks)


@dataclass(frozen=True)
class WrenchCone:
    """Halfspace form of the contact wrench cone at a reference point.

    ``A`` stacks L rows (a_1, a_2) acting on wrenches (f, tau_origin):
    membership is A w <= 0.  Rows are unit-normalized.
    """

    A: np.ndarray
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        if self.A.shape[1] != 6:
            raise ValueError("wrench cone rows live in 6D")

    @property
    def L(self) -> int:
        return self.A.shape[0]

    @property
    def force_block(self) -> np.ndarray:
        """First three columns (the coefficients on the resultant force)."""
        return self.A[:, :3]

    @property
    def moment_block(self) -> np.ndarray:
        return self.A[:, 3:]

    @property
    def dual_twists(self) -> list[DualTwist]:
        return [DualTwist(a=row[3:], a_O=row[:3]) for row in self.A]

    def row_moments_at(self, point) -> np.ndarray:
        """Transported row coordinates a_G = a_1 + a_2 x (G - O), one per row.

        These 3-vectors are simultaneously (i) the static-equilibrium row
        data at G, and (ii) the facet rows of the feasible COM-acceleration
        cone at G acting on (accel - gravity).
        """
        offset = np.asarray(point, dtype=float) - self.origin
        return self.force_block + np.cross(self.moment_block, offset[None, :])


def compute_cwc(cs: ContactSet, origin=(0.0, 0.0, 0.0), lp_minimality: bool = False) -> WrenchCone:
    """Contact wrench cone of a stance, as halfspace rows at ``origin``.

    Stacks the pyramid edge wrenches of every contact and converts the
    generators to facet rows.  The conversion already returns one row per
    facet, so the optional LP redundancy pass (``lp_minimality``) is a
    cross-check rather than a necessity.  Done once per stance; all per-COM
    cones afterwards are row transports of this object.
    """
    origin = np.asarray(origin, dtype=float)
    rays6 = []
    for c in cs.contacts:
        arm = c.position - origin
        for f in linearize_friction(c).rays:
            rays6.append(np.concatenate([f, np.cross(arm, f)]))
    rows = cone_v_to_h(np.array(rays6))
    if lp_minimality:
        rows = minimal_hrep_cone(rows)
    return WrenchCone(A=rows, origin=origin)


def cwc_membership(w: WrenchCone, wrench: Screw, tol: float = EPS_LP):
    """Row slacks of a wrench against the cone; member iff all <= tol.

    The wrench is transported to the cone's reference point first, so the
    verdict does not depend on where the caller expressed it.
    """
    wr = wrench.at(w.origin)
    slacks = w.A @ wr.as_vector()
    return bool(slacks.max() <= tol), slacks


def wrench_realizable(cs: ContactSet, wrench: Screw, origin=(0.0, 0.0, 0.0)):
    """Ground-truth LP: contact forces realizing a net wrench, or None.

    Feasibility of { f_all : F_i f_i <= 0 for all i,  G f_all = w } where w
    is the wrench at ``origin``.  Returns the stacked force witness when
    feasible.  This is the independent check against which cone membership
    is validated; it shares only the pyramid linearization with the CWC.
    """
    origin = np.asarray(origin, dtype=float)
    K = len(cs)
    G = grasp_matrix(cs, origin)
    w6 = wrench.at(origin).as_vector()
    F_rows = []
    for i, c in enumerate(cs.contacts):
        F = linearize_friction(c).halfspaces
        block = np.zeros((F.shape[0], 3 * K))
        block[:, 3 * i : 3 * i + 3] = F
        F_rows.append(block)
    A_ub = np.vstack(F_rows)
    res = lp_solve(np.zeros(3 * K), A_ub=A_ub, b_ub=np.zeros(A_ub.shape[0]), A_eq=G, b_eq=w6)
    return res.x if res.optimal else None
