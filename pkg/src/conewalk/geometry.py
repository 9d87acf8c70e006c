"""Screw algebra: twists, wrenches, moment transport and their duality pairing.

A screw is a vector field on 3-space defined by a resultant vector and a
moment taken at a reference point.  Twists (generalized velocities) and
wrenches (generalized forces) are both screws; their pairing is the
instantaneous power and does not depend on the point where both are
expressed.  All downstream cone computations rely on re-expressing halfspace
rows at a moving point, so reference points are always explicit here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Screw",
    "DualTwist",
    "transport_moment",
    "screw_pairing",
    "dual_twist_at",
]


def _vec3(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class Screw:
    """Screw coordinates (resultant, moment) at an explicit reference point.

    For a twist the resultant is the angular velocity and the moment is the
    linear velocity at ``ref_point``; for a wrench the resultant is the net
    force and the moment the net torque at ``ref_point``.
    """

    resultant: np.ndarray
    moment: np.ndarray
    ref_point: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        object.__setattr__(self, "resultant", _vec3(self.resultant))
        object.__setattr__(self, "moment", _vec3(self.moment))
        object.__setattr__(self, "ref_point", _vec3(self.ref_point))

    def at(self, point) -> "Screw":
        """Same screw with its moment transported to ``point``."""
        return transport_moment(self, point)

    def as_vector(self) -> np.ndarray:
        """Stacked (resultant, moment) 6-vector at the current point."""
        return np.concatenate([self.resultant, self.moment])


def transport_moment(s: Screw, point) -> Screw:
    """Transport the moment of ``s`` to a new reference point.

    The moment at P of a screw with resultant r and moment m_O at O is
    m_P = m_O + (O - P) x r; the resultant is unchanged.
    """
    p = _vec3(point)
    moment = s.moment + np.cross(s.ref_point - p, s.resultant)
    return Screw(s.resultant, moment, p)


def screw_pairing(twist: Screw, wrench: Screw) -> float:
    """Point-invariant pairing v.f + w.tau between a twist and a wrench.

    Both screws are transported to the wrench's reference point before the
    products are taken; the result does not depend on that choice.
    """
    t = twist if np.array_equal(twist.ref_point, wrench.ref_point) else twist.at(wrench.ref_point)
    return float(np.dot(t.moment, wrench.resultant) + np.dot(t.resultant, wrench.moment))


@dataclass(frozen=True)
class DualTwist:
    """A halfspace row of a wrench cone, read as a twist.

    The row constrains wrenches by a_O . f + a . tau_O <= 0 where the
    moment coordinate ``a_O`` is taken at the world origin.  Because the
    row transforms like a twist, the same inequality can be evaluated at
    any point G by replacing a_O with the transported moment (see
    :func:`dual_twist_at`), which is what makes moving-point cone
    re-expression a constant-time operation.
    """

    a: np.ndarray
    a_O: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _vec3(self.a))
        object.__setattr__(self, "a_O", _vec3(self.a_O))

    def as_screw(self) -> Screw:
        return Screw(resultant=self.a, moment=self.a_O, ref_point=np.zeros(3))

    def pair(self, wrench: Screw) -> float:
        """Row value on a wrench; <= 0 means the wrench satisfies the row."""
        return screw_pairing(self.as_screw(), wrench)


def dual_twist_at(d: DualTwist, point) -> np.ndarray:
    """Moment coordinate of the dual twist at ``point``.

    Returns a_G = a_O + a x p_G.  The sign convention is pinned by the
    pairing identity (a_G, a).(f, tau_G) == (a_O, a).(f, tau_O) for every
    wrench, which the test suite checks on random inputs.
    """
    p = _vec3(point)
    return d.a_O + np.cross(d.a, p)
